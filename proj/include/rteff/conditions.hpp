#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rteff/detector.hpp"
#include "rteff/errors.hpp"
#include "rteff/mathutil.hpp"
#include "rteff/telemetry.hpp"

// Per-trip operating conditions and Spearman ranking of their association
// with the measured efficiency.

namespace rteff {

inline constexpr std::array<const char*, 4> kConditionNames = {"soc_rt", "dod_rt",
                                                               "rms_crate", "temp_rt"};

struct ConditionVector {
    double soc_rt;         // mean SoC over the trip
    double dod_rt;         // max - min SoC over the trip
    double rms_crate;      // RMS of I/C_n, 1/hours
    double temp_rt;        // mean temperature, °C
    std::size_t n_samples; // samples in [start, end]

    double by_name(const std::string& name) const {
        if (name == "soc_rt") return soc_rt;
        if (name == "dod_rt") return dod_rt;
        if (name == "rms_crate") return rms_crate;
        if (name == "temp_rt") return temp_rt;
        throw config_error("unknown condition name: " + name);
    }
};

/// Means, extrema and RMS over all samples in [start, end] inclusive.
inline ConditionVector compute_conditions(const TelemetrySeries& series, const SocTrace& soc,
                                          const RoundTrip& trip) {
    if (trip.end_index >= series.records.size() || trip.start_index >= trip.end_index)
        throw config_error("compute_conditions: trip indices invalid for series");
    if (soc.soc.size() != series.records.size())
        throw config_error("compute_conditions: SoC trace not aligned");
    const std::size_t n = trip.end_index - trip.start_index + 1;
    double soc_sum = 0.0, temp_sum = 0.0, crate_sq_sum = 0.0;
    double soc_min = soc.soc[trip.start_index], soc_max = soc_min;
    for (std::size_t j = trip.start_index; j <= trip.end_index; ++j) {
        const double s = soc.soc[j];
        soc_sum += s;
        soc_min = std::min(soc_min, s);
        soc_max = std::max(soc_max, s);
        temp_sum += series.records[j].temperature_c;
        const double crate = series.records[j].current_a / series.nominal_capacity_ah;
        crate_sq_sum += crate * crate;
    }
    const double dn = static_cast<double>(n);
    return {soc_sum / dn, soc_max - soc_min, std::sqrt(crate_sq_sum / dn), temp_sum / dn, n};
}

struct CorrelationResult {
    std::string condition_name;
    double rho = 0.0;
    double p_value = 1.0;
    bool significant = false;
    bool defined = true; // false when the condition was constant across trips
};

namespace detail {

/// Ranks with average ranks for ties (midrank), 1-based.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0; // mean of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

/// Spearman rank correlation: Pearson correlation of the midrank vectors,
/// with a two-sided p-value from t = rho sqrt((m-2)/(1-rho^2)), m-2 dof.
inline CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                                  double alpha = 0.05) {
    if (x.size() != y.size())
        throw undefined_correlation_error("spearman: length mismatch");
    const std::size_t m = x.size();
    if (m < 3) throw undefined_correlation_error("spearman: need at least 3 samples");

    const std::vector<double> rx = detail::average_ranks(x);
    const std::vector<double> ry = detail::average_ranks(y);
    const double mean = 0.5 * static_cast<double>(m + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw undefined_correlation_error("spearman: constant input sequence");
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);

    const double dof = static_cast<double>(m - 2);
    double p;
    if (std::fabs(rho) >= 1.0) {
        p = 0.0;
    } else {
        const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
        p = math::student_t_two_sided_p(t, dof);
    }
    CorrelationResult r;
    r.rho = rho;
    r.p_value = p;
    r.significant = p < alpha;
    return r;
}

/// Correlate each of the four conditions with the efficiencies. Significant
/// conditions come first, ordered by |rho| descending; constant conditions
/// are returned with defined = false. The regression condition pair is the
/// caller's explicit choice; (rms_crate, temp_rt) is the documented default.
inline std::vector<CorrelationResult> rank_conditions(
    std::span<const ConditionVector> conditions, std::span<const double> eta,
    double alpha = 0.05) {
    if (conditions.size() != eta.size())
        throw insufficient_data_error("rank_conditions: conditions and eta differ in length");
    if (conditions.size() < 3)
        throw insufficient_data_error("rank_conditions: need at least 3 estimates");

    std::vector<CorrelationResult> results;
    for (const char* name : kConditionNames) {
        std::vector<double> values(conditions.size());
        for (std::size_t i = 0; i < conditions.size(); ++i)
            values[i] = conditions[i].by_name(name);
        CorrelationResult r;
        try {
            r = spearman(values, eta, alpha);
        } catch (const undefined_correlation_error&) {
            r.rho = 0.0;
            r.p_value = 1.0;
            r.significant = false;
            r.defined = false;
        }
        r.condition_name = name;
        results.push_back(std::move(r));
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const CorrelationResult& a, const CorrelationResult& b) {
                         if (a.significant != b.significant) return a.significant;
                         return std::fabs(a.rho) > std::fabs(b.rho);
                     });
    return results;
}

} // namespace rteff
