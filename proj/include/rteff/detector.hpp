#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rteff/errors.hpp"
#include "rteff/telemetry.hpp"

// Round-trip detection. A trip opens at the last sample of a rest window
// (|I| below rest_current_max for at least rest_duration_min) and closes at
// the middle of the first run of samples whose SoC has returned to the
// start value within soc_match_tolerance, subject to strict duration bounds
// trip_duration_min < t_end - t_start < trip_duration_max.

namespace rteff {

struct DetectorConfig {
    double rest_current_max_a;    // I_r
    double rest_duration_min_s;   // t_r,min
    double soc_match_tolerance;   // ΔSoC, fraction
    double trip_duration_min_s;   // t_min
    double trip_duration_max_s;   // t_max

    /// Defaults scale the rest-current threshold to 5% of a 1C current.
    static DetectorConfig defaults(double nominal_capacity_ah) {
        return {0.05 * nominal_capacity_ah, 300.0, 0.001, 600.0, 86400.0};
    }

    void validate() const {
        if (!(rest_current_max_a > 0.0) || !(rest_duration_min_s > 0.0) ||
            !(soc_match_tolerance > 0.0) || !(trip_duration_min_s > 0.0) ||
            !(trip_duration_max_s > 0.0))
            throw config_error("detector: all parameters must be strictly positive");
        if (!(trip_duration_min_s < trip_duration_max_s))
            throw config_error("detector: trip_duration_min must be below trip_duration_max");
    }
};

struct RoundTrip {
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    std::vector<std::size_t> discharge_indices; // I < 0 within [start, end]
    std::vector<std::size_t> charge_indices;    // I > 0 within [start, end]
    std::string parent_segment;

    double duration_s(const TelemetrySeries& series) const {
        return static_cast<double>(end_index - start_index) * series.sampling_interval_s;
    }

    bool operator==(const RoundTrip& other) const {
        return start_index == other.start_index && end_index == other.end_index &&
               discharge_indices == other.discharge_indices &&
               charge_indices == other.charge_indices;
    }
};

/// Indices k whose preceding window [t_k - t_r,min, t_k) lies inside the
/// series and holds |I| < I_r throughout. Sorted ascending.
inline std::vector<std::size_t> find_rest_starts(const TelemetrySeries& series,
                                                 const DetectorConfig& config) {
    config.validate();
    std::vector<std::size_t> out;
    const std::size_t n = series.records.size();
    if (n == 0) return out;
    const auto window = static_cast<std::size_t>(
        std::floor(config.rest_duration_min_s / series.sampling_interval_s + 1e-9));
    if (window == 0 || window > n) return out;

    // last index whose current breaks the rest condition
    std::ptrdiff_t last_active = -1;
    for (std::size_t k = 0; k < n; ++k) {
        if (k >= window && last_active < static_cast<std::ptrdiff_t>(k - window))
            out.push_back(k);
        if (std::fabs(series.records[k].current_a) >= config.rest_current_max_a)
            last_active = static_cast<std::ptrdiff_t>(k);
    }
    return out;
}

/// Maximal runs [first, last] of consecutive samples with |I| < I_r.
inline std::vector<std::pair<std::size_t, std::size_t>> rest_runs(
    const TelemetrySeries& series, double rest_current_max_a) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    const std::size_t n = series.records.size();
    std::size_t k = 0;
    while (k < n) {
        if (std::fabs(series.records[k].current_a) < rest_current_max_a) {
            std::size_t j = k;
            while (j + 1 < n &&
                   std::fabs(series.records[j + 1].current_a) < rest_current_max_a)
                ++j;
            runs.emplace_back(k, j);
            k = j + 1;
        } else {
            ++k;
        }
    }
    return runs;
}

/// Detect round trips within one segment. Candidate starts are deduplicated
/// to the last sample of each maximal rest window; each start yields at most
/// one trip, closed at the middle (rounding down) of the first run of
/// SoC-matching samples inside the duration bounds.
inline std::vector<RoundTrip> detect_round_trips(const TelemetrySeries& series,
                                                 const SocTrace& soc,
                                                 const DetectorConfig& config) {
    config.validate();
    if (soc.soc.size() != series.records.size())
        throw config_error("detect_round_trips: SoC trace not aligned with series");

    std::vector<RoundTrip> trips;
    const std::vector<std::size_t> candidates = find_rest_starts(series, config);
    if (candidates.empty()) return trips;

    // Dedup each run of consecutive candidates to the rest window's last
    // sample. A run typically ends one past the rest window (the first
    // active sample also has a clean preceding window); step back onto the
    // window unless the run is that single active sample.
    std::vector<std::size_t> starts;
    std::size_t run_first = candidates[0];
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const bool run_ends =
            i + 1 == candidates.size() || candidates[i + 1] != candidates[i] + 1;
        if (!run_ends) continue;
        std::size_t start = candidates[i];
        if (std::fabs(series.records[start].current_a) >= config.rest_current_max_a &&
            start > run_first)
            --start;
        starts.push_back(start);
        if (i + 1 < candidates.size()) run_first = candidates[i + 1];
    }

    const double dt = series.sampling_interval_s;
    const std::size_t n = series.records.size();
    for (const std::size_t s : starts) {
        const double soc_ref = soc.soc[s];
        // strict bounds: t_min < (j - s) dt < t_max
        const auto j_min = s + static_cast<std::size_t>(
                                   std::floor(config.trip_duration_min_s / dt + 1e-9)) +
                           1;
        bool in_run = false;
        std::size_t run_first = 0, run_last = 0;
        bool closed = false;
        for (std::size_t j = j_min; j < n; ++j) {
            if (static_cast<double>(j - s) * dt >= config.trip_duration_max_s) break;
            if (std::fabs(soc.soc[j] - soc_ref) <= config.soc_match_tolerance) {
                if (!in_run) {
                    in_run = true;
                    run_first = j;
                }
                run_last = j;
            } else if (in_run) {
                closed = true;
                break;
            }
        }
        if (!in_run) continue;
        (void)closed; // a run truncated by t_max or series end still closes the trip
        RoundTrip trip;
        trip.start_index = s;
        trip.end_index = run_first + (run_last - run_first) / 2;
        trip.parent_segment = series.segment_id;
        for (std::size_t j = trip.start_index; j <= trip.end_index; ++j) {
            const double i = series.records[j].current_a;
            if (i < 0.0)
                trip.discharge_indices.push_back(j);
            else if (i > 0.0)
                trip.charge_indices.push_back(j);
        }
        trips.push_back(std::move(trip));
    }
    return trips;
}

} // namespace rteff
