#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rteff/detector.hpp"
#include "rteff/errors.hpp"
#include "rteff/telemetry.hpp"

// Per-trip energy efficiency by numerical integration of battery power,
// with propagation of per-sample voltage/current measurement uncertainty
// to a standard error of the efficiency.

namespace rteff {

/// Systematic sensor error model plus the window used when estimating the
/// random noise level from rest-period data. Defaults are placeholders for
/// a ~650 V / ±600 A pack BMS and should be reviewed per deployment.
struct SensorSpec {
    double voltage_offset_v = 0.1;
    double voltage_gain_error = 0.005;   // fraction of reading
    double voltage_resolution_v = 0.1;
    double current_offset_a = 0.5;
    double current_gain_error = 0.005;   // fraction of reading
    double current_resolution_a = 0.1;
    std::size_t noise_estimation_window = 300; // samples

    void validate() const {
        if (voltage_offset_v < 0 || voltage_gain_error < 0 || voltage_resolution_v < 0 ||
            current_offset_a < 0 || current_gain_error < 0 || current_resolution_a < 0)
            throw config_error("sensor spec fields must be non-negative");
    }
};

struct EnergyBreakdown {
    double e_dis_j; // discharged energy, joules
    double e_chg_j; // charged energy, joules
    double eta;     // e_dis_j / e_chg_j
};

struct EfficiencyEstimate {
    double eta = 0.0;
    double eta_stderr = 0.0;
    double e_dis_j = 0.0;
    double e_chg_j = 0.0;
    double e_dis_stderr_j = 0.0;
    double e_chg_stderr_j = 0.0;
    bool implausible = false; // eta outside [0.5, 1.2]
};

/// E_dis = Σ_dis -I U Δt, E_chg = Σ_chg I U Δt, eta = E_dis / E_chg.
/// The Δt factor cancels in the ratio but keeps the energies in joules.
inline EnergyBreakdown compute_efficiency(const TelemetrySeries& series,
                                          const RoundTrip& trip) {
    const double dt = series.sampling_interval_s;
    double e_dis = 0.0, e_chg = 0.0;
    for (const std::size_t j : trip.discharge_indices)
        e_dis += -series.records[j].current_a * series.records[j].voltage_v * dt;
    for (const std::size_t j : trip.charge_indices)
        e_chg += series.records[j].current_a * series.records[j].voltage_v * dt;
    if (!(e_chg > 0.0))
        throw degenerate_trip_error("round trip has no charge energy (segment " +
                                    trip.parent_segment + ")");
    return {e_dis, e_chg, e_dis / e_chg};
}

struct SampleStd {
    double s_u; // volts
    double s_i; // amperes
};

/// Quadrature combination of offset, gain (proportional to the reading),
/// resolution (uniform-distribution variance, res^2/12) and observed noise.
inline SampleStd sample_stderr(const TelemetryRecord& record, const SensorSpec& spec,
                               double noise_std_voltage, double noise_std_current) {
    const double su2 = spec.voltage_offset_v * spec.voltage_offset_v +
                       std::pow(spec.voltage_gain_error * std::fabs(record.voltage_v), 2) +
                       spec.voltage_resolution_v * spec.voltage_resolution_v / 12.0 +
                       noise_std_voltage * noise_std_voltage;
    const double si2 = spec.current_offset_a * spec.current_offset_a +
                       std::pow(spec.current_gain_error * std::fabs(record.current_a), 2) +
                       spec.current_resolution_a * spec.current_resolution_a / 12.0 +
                       noise_std_current * noise_std_current;
    return {std::sqrt(su2), std::sqrt(si2)};
}

struct NoiseEstimate {
    double voltage_std = 0.0;
    double current_std = 0.0;
};

/// Random sensor noise from rest-period data: the standard deviation of
/// first differences within rest runs, divided by sqrt(2). Uses up to
/// noise_estimation_window differences.
inline NoiseEstimate estimate_noise_std(const TelemetrySeries& series,
                                        double rest_current_max_a,
                                        std::size_t window) {
    std::vector<double> du, di;
    du.reserve(window);
    di.reserve(window);
    for (const auto& [first, last] : rest_runs(series, rest_current_max_a)) {
        for (std::size_t j = first; j < last && du.size() < window; ++j) {
            du.push_back(series.records[j + 1].voltage_v - series.records[j].voltage_v);
            di.push_back(series.records[j + 1].current_a - series.records[j].current_a);
        }
        if (du.size() >= window) break;
    }
    auto sample_std = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double mean = 0.0;
        for (const double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (const double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return {sample_std(du) * inv_sqrt2, sample_std(di) * inv_sqrt2};
}

struct PropagatedUncertainty {
    double s_e_dis_j;
    double s_e_chg_j;
    double s_eta;
};

/// S_E = sqrt( Σ (U^2 S_I^2 + I^2 S_U^2) Δt ) over each index set, and
/// S_eta = sqrt( (S_E_dis / E_chg)^2 + (E_dis S_E_chg / E_chg^2)^2 ).
/// Δt enters to the first power inside the square root, following the
/// source formulation verbatim; at 1 Hz the distinction is immaterial.
/// per_sample must be aligned with the full series.
inline PropagatedUncertainty propagate_uncertainty(const TelemetrySeries& series,
                                                   const RoundTrip& trip,
                                                   std::span<const SampleStd> per_sample,
                                                   double e_dis_j, double e_chg_j) {
    if (per_sample.size() != series.records.size())
        throw config_error("propagate_uncertainty: per-sample errors not aligned");
    const double dt = series.sampling_interval_s;
    auto variance_over = [&](const std::vector<std::size_t>& indices) {
        double var = 0.0;
        for (const std::size_t j : indices) {
            const TelemetryRecord& r = series.records[j];
            const SampleStd& s = per_sample[j];
            var += (r.voltage_v * r.voltage_v * s.s_i * s.s_i +
                    r.current_a * r.current_a * s.s_u * s.s_u) *
                   dt;
        }
        return var;
    };
    const double s_e_dis = std::sqrt(variance_over(trip.discharge_indices));
    const double s_e_chg = std::sqrt(variance_over(trip.charge_indices));
    const double a = s_e_dis / e_chg_j;
    const double b = e_dis_j * s_e_chg / (e_chg_j * e_chg_j);
    return {s_e_dis, s_e_chg, std::sqrt(a * a + b * b)};
}

/// Full per-trip estimate from energies plus propagated uncertainty.
inline EfficiencyEstimate estimate_trip(const TelemetrySeries& series, const RoundTrip& trip,
                                        std::span<const SampleStd> per_sample) {
    const EnergyBreakdown e = compute_efficiency(series, trip);
    const PropagatedUncertainty u =
        propagate_uncertainty(series, trip, per_sample, e.e_dis_j, e.e_chg_j);
    EfficiencyEstimate est;
    est.eta = e.eta;
    est.eta_stderr = u.s_eta;
    est.e_dis_j = e.e_dis_j;
    est.e_chg_j = e.e_chg_j;
    est.e_dis_stderr_j = u.s_e_dis_j;
    est.e_chg_stderr_j = u.s_e_chg_j;
    est.implausible = e.eta > 1.2 || e.eta < 0.5;
    return est;
}

} // namespace rteff
