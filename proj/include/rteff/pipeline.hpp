#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rteff/conditions.hpp"
#include "rteff/csv.hpp"
#include "rteff/detector.hpp"
#include "rteff/efficiency.hpp"
#include "rteff/errors.hpp"
#include "rteff/regression.hpp"
#include "rteff/telemetry.hpp"
#include "rteff/timeutil.hpp"

// Composition of the analysis stages over parsed segments: SoC, trip
// detection, efficiency with uncertainty, conditions. Shared by the CLI
// commands and the integration tests.

namespace rteff {

enum class SocSource { constant, bms_trace };
enum class PartitionRule { month, day };

inline constexpr std::array<const char*, 2> kDefaultConditionPair = {"rms_crate", "temp_rt"};

/// DetectorConfig with the rest-current threshold left open; when absent it
/// scales with the segment capacity as 0.05 C_n amperes.
struct DetectorSettings {
    std::optional<double> rest_current_max_a;
    double rest_duration_min_s = 300.0;
    double soc_match_tolerance = 0.001;
    double trip_duration_min_s = 600.0;
    double trip_duration_max_s = 86400.0;
};

struct AnalysisSettings {
    IngestConfig ingest;
    DetectorSettings detector;
    SensorSpec sensors;
    SocSource soc_source = SocSource::constant;
    double alpha = 0.05;
    // nullopt ("auto") picks the top-2 significant ranked conditions
    std::optional<std::array<std::string, 2>> condition_pair =
        std::array<std::string, 2>{kDefaultConditionPair[0], kDefaultConditionPair[1]};
    PartitionRule partition_rule = PartitionRule::month;
    std::optional<std::pair<double, double>> reference; // nullopt: dataset average

    DetectorConfig resolved_detector(double capacity_ah) const {
        const DetectorConfig d{detector.rest_current_max_a.value_or(0.05 * capacity_ah),
                               detector.rest_duration_min_s, detector.soc_match_tolerance,
                               detector.trip_duration_min_s, detector.trip_duration_max_s};
        d.validate();
        return d;
    }
};

struct TripAnalysis {
    std::string segment_id;
    double start_timestamp_s = 0.0;
    double end_timestamp_s = 0.0;
    double soc_start = 0.0;
    double soc_end = 0.0;
    double duration_s = 0.0;
    EfficiencyEstimate estimate;
    ConditionVector conditions{};
};

struct SegmentAnalysis {
    std::vector<TripAnalysis> trips;
    std::size_t trips_discarded = 0; // degenerate (no charge energy)
    std::size_t implausible_count = 0;
    bool soc_warning = false;
    std::vector<std::string> diagnostics;
};

/// Run detection and per-trip estimation over one segment.
inline SegmentAnalysis analyze_segment(const TelemetrySeries& series,
                                       const AnalysisSettings& settings) {
    SegmentAnalysis out;
    if (series.records.size() < 2) return out;

    SocTrace soc;
    if (settings.soc_source == SocSource::bms_trace) {
        if (series.bms_soc.size() == series.records.size()) {
            soc = soc_from_bms(series, settings.ingest.soc_band);
        } else {
            out.diagnostics.push_back("segment " + series.segment_id +
                                      ": no BMS SoC column, falling back to coulomb counting");
            soc = compute_soc(series, settings.ingest.soc_band);
        }
    } else {
        soc = compute_soc(series, settings.ingest.soc_band);
    }
    if (soc.plausibility_warning) {
        out.soc_warning = true;
        out.diagnostics.push_back(
            "segment " + series.segment_id + ": SoC left plausibility band at sample " +
            std::to_string(soc.first_violation_index.value_or(0)) +
            " (check capacity / initial SoC)");
    }

    const DetectorConfig detector = settings.resolved_detector(series.nominal_capacity_ah);
    const std::vector<RoundTrip> trips = detect_round_trips(series, soc, detector);

    const NoiseEstimate noise = estimate_noise_std(series, detector.rest_current_max_a,
                                                   settings.sensors.noise_estimation_window);
    std::vector<SampleStd> per_sample(series.records.size());
    for (std::size_t k = 0; k < series.records.size(); ++k)
        per_sample[k] = sample_stderr(series.records[k], settings.sensors,
                                      noise.voltage_std, noise.current_std);

    for (const RoundTrip& trip : trips) {
        TripAnalysis ta;
        try {
            ta.estimate = estimate_trip(series, trip, per_sample);
        } catch (const degenerate_trip_error& e) {
            ++out.trips_discarded;
            out.diagnostics.emplace_back(e.what());
            continue;
        }
        if (ta.estimate.implausible) ++out.implausible_count;
        ta.segment_id = series.segment_id;
        ta.start_timestamp_s = series.records[trip.start_index].timestamp_s;
        ta.end_timestamp_s = series.records[trip.end_index].timestamp_s;
        ta.soc_start = soc.soc[trip.start_index];
        ta.soc_end = soc.soc[trip.end_index];
        ta.duration_s = trip.duration_s(series);
        ta.conditions = compute_conditions(series, soc, trip);
        out.trips.push_back(std::move(ta));
    }
    return out;
}

struct ConditionPairSelection {
    std::array<std::string, 2> names;
    std::vector<CorrelationResult> ranking; // empty when the pair was explicit
    bool fallback_used = false; // auto selection found fewer than 2 significant
};

/// Resolve the regression condition pair: explicit names pass through,
/// otherwise the top-2 significant ranked conditions, falling back to the
/// default pair when the ranking is inconclusive. The ranking itself is
/// always attached when enough trips exist.
inline ConditionPairSelection select_condition_pair(std::span<const TripAnalysis> trips,
                                                    const AnalysisSettings& settings) {
    ConditionPairSelection sel;
    std::vector<ConditionVector> conditions;
    std::vector<double> eta;
    conditions.reserve(trips.size());
    for (const TripAnalysis& t : trips) {
        conditions.push_back(t.conditions);
        eta.push_back(t.estimate.eta);
    }
    if (settings.condition_pair) {
        sel.names = *settings.condition_pair;
        for (const std::string& n : sel.names) {
            bool known = false;
            for (const char* k : kConditionNames) known = known || n == k;
            if (!known) throw config_error("unknown condition name: " + n);
        }
        try {
            sel.ranking = rank_conditions(conditions, eta, settings.alpha);
        } catch (const insufficient_data_error&) {
            // explicit pair does not need the ranking
        }
        return sel;
    }
    sel.ranking = rank_conditions(conditions, eta, settings.alpha);
    std::vector<std::string> significant;
    for (const CorrelationResult& r : sel.ranking)
        if (r.significant) significant.push_back(r.condition_name);
    if (significant.size() >= 2) {
        sel.names = {significant[0], significant[1]};
    } else {
        sel.names = {kDefaultConditionPair[0], kDefaultConditionPair[1]};
        sel.fallback_used = true;
    }
    return sel;
}

inline std::vector<WlsObservation> to_observations(std::span<const TripAnalysis> trips,
                                                   const std::array<std::string, 2>& pair) {
    std::vector<WlsObservation> obs;
    obs.reserve(trips.size());
    for (const TripAnalysis& t : trips)
        obs.push_back({t.conditions.by_name(pair[0]), t.conditions.by_name(pair[1]),
                       t.estimate.eta, t.estimate.eta_stderr});
    return obs;
}

/// Group trips into calendar partitions by trip start time (UTC).
inline std::vector<FadePartition> partition_trips(std::span<const TripAnalysis> trips,
                                                  const std::array<std::string, 2>& pair,
                                                  PartitionRule rule) {
    std::map<std::string, FadePartition> buckets;
    for (const TripAnalysis& t : trips) {
        const std::string label = rule == PartitionRule::month
                                      ? timeutil::month_label(t.start_timestamp_s)
                                      : timeutil::day_label(t.start_timestamp_s);
        FadePartition& p = buckets[label];
        p.label = label;
        p.trips.push_back({t.conditions.by_name(pair[0]), t.conditions.by_name(pair[1]),
                           t.estimate.eta, t.estimate.eta_stderr});
    }
    std::vector<FadePartition> out;
    out.reserve(buckets.size());
    for (auto& [label, p] : buckets) out.push_back(std::move(p));
    return out;
}

} // namespace rteff
