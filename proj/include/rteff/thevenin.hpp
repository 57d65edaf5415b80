#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rteff/errors.hpp"
#include "rteff/telemetry.hpp"

// Thevenin-model telemetry generator: U_t = U_EMF(SoC) + R0 I, coulombic
// efficiency 1, no RC branch. Closed-form efficiency and fade companions
// make it the ground-truth oracle for the analysis pipeline.

namespace rteff {

/// Monotone piecewise-linear EMF curve over SoC in [0, 1]. A single point
/// is a flat curve.
class EmfCurve {
public:
    static EmfCurve flat(double volts) { return EmfCurve({{0.0, volts}}); }

    explicit EmfCurve(std::vector<std::pair<double, double>> points)
        : points_(std::move(points)) {
        if (points_.empty()) throw config_error("emf curve needs at least one point");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!(points_[i].second > 0.0))
                throw config_error("emf curve must be strictly positive");
            if (i > 0 && (points_[i].first <= points_[i - 1].first ||
                          points_[i].second < points_[i - 1].second))
                throw config_error("emf curve must be non-decreasing in SoC");
        }
    }

    double operator()(double soc) const {
        if (points_.size() == 1 || soc <= points_.front().first)
            return points_.front().second;
        if (soc >= points_.back().first) return points_.back().second;
        std::size_t i = 1;
        while (points_[i].first < soc) ++i;
        const auto& [x0, y0] = points_[i - 1];
        const auto& [x1, y1] = points_[i];
        return y0 + (y1 - y0) * (soc - x0) / (x1 - x0);
    }

    bool is_flat() const { return points_.size() == 1; }

private:
    std::vector<std::pair<double, double>> points_;
};

struct TheveninParams {
    EmfCurve emf = EmfCurve::flat(650.0);
    double r0_ohm = 0.01;
    double capacity_ah = 100.0;
    double initial_soc = 0.5;

    void validate() const {
        if (r0_ohm < 0.0) throw config_error("r0 must be non-negative");
        if (!(capacity_ah > 0.0)) throw config_error("capacity must be positive");
        if (initial_soc < 0.0 || initial_soc > 1.0)
            throw config_error("initial SoC must lie in [0, 1]");
    }
};

struct Phase {
    double duration_s;
    double current_a; // charge-positive
};

/// Constant or sinusoidal pack temperature over the profile.
struct TemperatureTrace {
    double mean_c = 20.0;
    double amplitude_c = 0.0;
    double period_s = 86400.0;
    double phase_rad = 0.0;

    double operator()(double elapsed_s) const {
        if (amplitude_c == 0.0) return mean_c;
        return mean_c +
               amplitude_c * std::sin(2.0 * M_PI * elapsed_s / period_s + phase_rad);
    }
};

struct DutyProfile {
    std::vector<Phase> phases;
    std::size_t repeat_count = 1;
    TemperatureTrace temperature;
    double noise_std_voltage_v = 0.0; // measurement noise, not process noise
    double noise_std_current_a = 0.0;
    double start_timestamp_s = 0.0;
};

/// Generate 1 Hz telemetry. The physical SoC integrates the commanded
/// current; sensor noise perturbs only the reported signals. Deterministic
/// for a fixed seed. Throws infeasible_profile_error when SoC leaves [0, 1].
inline TelemetrySeries simulate(const TheveninParams& params, const DutyProfile& profile,
                                std::uint64_t seed, std::string segment_id = "sim") {
    params.validate();
    if (profile.phases.empty()) throw config_error("duty profile has no phases");
    for (const Phase& p : profile.phases)
        if (!(p.duration_s > 0.0)) throw config_error("phase durations must be positive");

    TelemetrySeries series;
    series.sampling_interval_s = 1.0;
    series.nominal_capacity_ah = params.capacity_ah;
    series.initial_soc = params.initial_soc;
    series.segment_id = std::move(segment_id);

    std::size_t total = 0;
    for (const Phase& p : profile.phases)
        total += static_cast<std::size_t>(std::llround(p.duration_s));
    total *= std::max<std::size_t>(profile.repeat_count, 1);
    series.records.reserve(total);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise_u(0.0, 1.0), noise_i(0.0, 1.0);
    const bool with_noise_u = profile.noise_std_voltage_v > 0.0;
    const bool with_noise_i = profile.noise_std_current_a > 0.0;

    const double soc_per_amp_second = 1.0 / (3600.0 * params.capacity_ah);
    double soc = params.initial_soc;
    double elapsed = 0.0;
    const std::size_t reps = std::max<std::size_t>(profile.repeat_count, 1);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        for (std::size_t pi = 0; pi < profile.phases.size(); ++pi) {
            const Phase& phase = profile.phases[pi];
            const auto steps = static_cast<std::size_t>(std::llround(phase.duration_s));
            for (std::size_t k = 0; k < steps; ++k) {
                soc += phase.current_a * soc_per_amp_second;
                if (soc < -1e-12 || soc > 1.0 + 1e-12)
                    throw infeasible_profile_error(
                        "SoC left [0, 1] in phase " + std::to_string(pi) + " (repeat " +
                            std::to_string(rep) + ", SoC " + std::to_string(soc) + ")",
                        pi);
                TelemetryRecord rec;
                rec.timestamp_s = profile.start_timestamp_s + elapsed;
                const double u_true = params.emf(soc) + params.r0_ohm * phase.current_a;
                rec.current_a =
                    phase.current_a +
                    (with_noise_i ? profile.noise_std_current_a * noise_i(rng) : 0.0);
                rec.voltage_v =
                    u_true + (with_noise_u ? profile.noise_std_voltage_v * noise_u(rng) : 0.0);
                rec.temperature_c = profile.temperature(elapsed);
                series.records.push_back(rec);
                elapsed += 1.0;
            }
        }
    }
    return series;
}

struct AnalyticEta {
    double exact;      // (U - R I) / (U + R I)
    double linearized; // 1 - 2 R I / U
};

/// Constant-current round-trip efficiency of the ohmic Thevenin model with
/// flat EMF, exact and first-order in R I / U.
inline AnalyticEta analytic_eta(double u_emf_c, double r0, double i_c) {
    if (r0 < 0.0 || i_c < 0.0 || !(u_emf_c > r0 * i_c))
        throw domain_error("analytic_eta: requires u_emf_c > r0*i_c >= 0");
    const double drop = r0 * i_c;
    return {(u_emf_c - drop) / (u_emf_c + drop), 1.0 - 2.0 * drop / u_emf_c};
}

/// Expected efficiency fade in percent points for a resistance increase at
/// fixed operating current: 100 * 2 (R - R_BoL) I_c / U_EMF. Inputs are
/// expected positive with r0_now >= r0_bol.
inline double expected_fade_pp(double r0_bol, double r0_now, double i_c, double u_emf_c) {
    return 100.0 * 2.0 * (r0_now - r0_bol) * i_c / u_emf_c;
}

} // namespace rteff
