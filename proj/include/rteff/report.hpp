#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "rteff/conditions.hpp"
#include "rteff/csv.hpp"
#include "rteff/pipeline.hpp"
#include "rteff/regression.hpp"

// Machine-readable outputs. Floats are rendered at 9 significant digits so
// reruns and golden files compare byte for byte.

namespace rteff {

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Double rounded to its 9-significant-digit decimal form, for JSON fields.
inline double round9(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_g9(v).c_str(), nullptr);
}

/// Timestamps keep full integer seconds (9 significant digits would clip
/// epoch values); fractional seconds get millisecond precision.
inline std::string format_timestamp(double ts) {
    char buf[40];
    if (ts == std::floor(ts) && std::fabs(ts) < 9e15)
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(ts));
    else
        std::snprintf(buf, sizeof buf, "%.3f", ts);
    return buf;
}

inline nlohmann::json to_json(const ParseReport& r) {
    return {{"rows_read", r.rows_read},
            {"rows_kept", r.rows_kept},
            {"rows_dropped", r.rows_dropped},
            {"dropped_parse", r.dropped_parse},
            {"dropped_voltage", r.dropped_voltage},
            {"dropped_temperature", r.dropped_temperature},
            {"segments", r.segments}};
}

/// Audit CSV of detected trips.
inline void write_trips_csv(std::span<const TripAnalysis> trips, std::ostream& out) {
    out << "segment_id,start_timestamp,end_timestamp,soc_start,soc_end,duration_s\n";
    for (const TripAnalysis& t : trips)
        out << t.segment_id << ',' << format_timestamp(t.start_timestamp_s) << ','
            << format_timestamp(t.end_timestamp_s) << ',' << format_g9(t.soc_start) << ','
            << format_g9(t.soc_end) << ',' << format_g9(t.duration_s) << '\n';
}

inline void write_efficiency_csv(std::span<const TripAnalysis> trips, std::ostream& out) {
    out << "segment_id,start_timestamp,end_timestamp,eta,eta_stderr,e_dis_J,e_chg_J\n";
    for (const TripAnalysis& t : trips)
        out << t.segment_id << ',' << format_timestamp(t.start_timestamp_s) << ','
            << format_timestamp(t.end_timestamp_s) << ',' << format_g9(t.estimate.eta)
            << ',' << format_g9(t.estimate.eta_stderr) << ','
            << format_g9(t.estimate.e_dis_j) << ',' << format_g9(t.estimate.e_chg_j)
            << '\n';
}

/// Long-format scatter data, one block per condition, for external plotting.
inline void write_scatter_csv(std::span<const TripAnalysis> trips, std::ostream& out) {
    out << "condition,value,eta,eta_stderr\n";
    for (const char* name : kConditionNames)
        for (const TripAnalysis& t : trips)
            out << name << ',' << format_g9(t.conditions.by_name(name)) << ','
                << format_g9(t.estimate.eta) << ',' << format_g9(t.estimate.eta_stderr)
                << '\n';
}

inline nlohmann::json to_json(const CorrelationResult& r) {
    return {{"condition", r.condition_name},
            {"rho", round9(r.rho)},
            {"p_value", round9(r.p_value)},
            {"significant", r.significant},
            {"defined", r.defined}};
}

inline nlohmann::json correlations_json(const ConditionPairSelection& sel,
                                        std::span<const CorrelationResult> ranking) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CorrelationResult& r : ranking) arr.push_back(to_json(r));
    return {{"ranking", arr},
            {"selected_pair", {sel.names[0], sel.names[1]}},
            {"fallback_used", sel.fallback_used}};
}

inline nlohmann::json to_json(const RegressionModel& m) {
    nlohmann::json cov = nlohmann::json::array();
    for (std::size_t r = 0; r < 3; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < 3; ++c) row.push_back(round9(m.beta_covariance[r][c]));
        cov.push_back(row);
    }
    return {{"beta", {round9(m.beta[0]), round9(m.beta[1]), round9(m.beta[2])}},
            {"beta_stderr",
             {round9(m.beta_stderr[0]), round9(m.beta_stderr[1]), round9(m.beta_stderr[2])}},
            {"p_values",
             {round9(m.p_values[0]), round9(m.p_values[1]), round9(m.p_values[2])}},
            {"beta_covariance", cov},
            {"adjusted_r2", round9(m.adjusted_r2)},
            {"n_trips", m.n_trips},
            {"condition_names", {m.condition_names[0], m.condition_names[1]}},
            {"partition_label", m.partition_label}};
}

inline nlohmann::json to_json(const FadeReport& r) {
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const FadePoint& p = r.points[i];
        nlohmann::json jp = {{"partition_label", p.partition_label},
                             {"eta_hat", round9(p.eta_hat)},
                             {"ci95_half_width", round9(p.ci95_half_width)},
                             {"n_trips", p.n_trips}};
        jp["moving_average"] =
            r.moving_average[i] ? nlohmann::json(round9(*r.moving_average[i]))
                                : nlohmann::json(nullptr);
        points.push_back(jp);
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& [label, reason] : r.skipped)
        skipped.push_back({{"partition_label", label}, {"reason", reason}});
    return {{"points", points},
            {"reference_conditions",
             {{r.condition_names[0], round9(r.reference_c1)},
              {r.condition_names[1], round9(r.reference_c2)}}},
            {"fade_pp", round9(r.fade_pp)},
            {"skipped", skipped}};
}

inline void write_fade_csv(const FadeReport& r, std::ostream& out) {
    out << "partition_label,eta_hat,ci95_lo,ci95_hi,moving_avg,n_trips\n";
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const FadePoint& p = r.points[i];
        out << p.partition_label << ',' << format_g9(p.eta_hat) << ','
            << format_g9(p.eta_hat - p.ci95_half_width) << ','
            << format_g9(p.eta_hat + p.ci95_half_width) << ',';
        if (r.moving_average[i]) out << format_g9(*r.moving_average[i]);
        out << ',' << p.n_trips << '\n';
    }
}

} // namespace rteff
