#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "rteff/errors.hpp"
#include "rteff/thevenin.hpp"
#include "rteff/timeutil.hpp"

// Multi-month fleet scenarios: one telemetry segment per calendar-month
// partition, bus-like duty (rest / discharge / charge cycles at rotating
// current levels), seasonal plus intraday temperature variation, and a
// linear R0 aging ramp across partitions.

namespace rteff {

struct ScenarioConfig {
    std::string start_month = "2019-08";
    std::size_t partitions = 42;
    std::size_t days_per_partition = 1;
    std::size_t trips_per_day = 12;

    double capacity_ah = 100.0;
    double initial_soc = 0.9;
    EmfCurve emf = EmfCurve::flat(650.0);
    double r0_ohm = 0.0975;
    double r0_end_factor = 1.17; // R0 multiplier reached at the last partition

    std::vector<double> current_levels_a = {80.0, 100.0, 120.0};
    double discharge_s = 1800.0;
    double charge_s = 1800.0;
    double rest_s = 600.0; // minimum rest between trips; idle time is spread evenly

    double temp_mean_c = 15.0;
    double temp_seasonal_amplitude_c = 10.0;
    double temp_daily_amplitude_c = 5.0;

    double noise_std_voltage_v = 0.0;
    double noise_std_current_a = 0.0;

    void validate() const {
        if (partitions == 0 || days_per_partition == 0 || trips_per_day == 0)
            throw config_error("scenario: partitions, days and trips must be positive");
        if (current_levels_a.empty())
            throw config_error("scenario: at least one current level required");
        const double day_used =
            static_cast<double>(trips_per_day) * (rest_s + discharge_s + charge_s);
        if (day_used > 86400.0)
            throw config_error("scenario: daily duty exceeds 24 hours");
        if (!timeutil::month_label_to_epoch(start_month))
            throw config_error("scenario: start_month must be YYYY-MM");
        if (!(r0_end_factor >= 1.0))
            throw config_error("scenario: r0_end_factor must be >= 1");
    }
};

struct ScenarioSegment {
    std::string label; // "YYYY-MM"
    double r0_ohm;     // aged resistance used for this partition
    TelemetrySeries series;
};

inline std::string add_months(const std::string& start_month, std::size_t offset) {
    int y = std::stoi(start_month.substr(0, 4));
    int m = std::stoi(start_month.substr(5, 2)) - 1 + static_cast<int>(offset);
    y += m / 12;
    m %= 12;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", y, m + 1);
    return buf;
}

/// R0 multiplier of partition p under the linear aging ramp.
inline double aging_factor(const ScenarioConfig& cfg, std::size_t partition) {
    if (cfg.partitions <= 1) return 1.0;
    return 1.0 + (cfg.r0_end_factor - 1.0) * static_cast<double>(partition) /
                     static_cast<double>(cfg.partitions - 1);
}

/// Generate all partitions. Deterministic for a fixed seed; partition p
/// uses sub-seed seed + p so single partitions can be regenerated.
inline std::vector<ScenarioSegment> build_scenario(const ScenarioConfig& cfg,
                                                   std::uint64_t seed) {
    cfg.validate();
    std::vector<ScenarioSegment> out;
    out.reserve(cfg.partitions);
    const std::size_t n_levels = cfg.current_levels_a.size();
    for (std::size_t p = 0; p < cfg.partitions; ++p) {
        const std::string label = add_months(cfg.start_month, p);
        const auto month_epoch = timeutil::month_label_to_epoch(label);
        if (!month_epoch) throw config_error("scenario: bad month label " + label);

        TheveninParams params;
        params.emf = cfg.emf;
        params.capacity_ah = cfg.capacity_ah;
        params.initial_soc = cfg.initial_soc;
        params.r0_ohm = cfg.r0_ohm * aging_factor(cfg, p);

        DutyProfile profile;
        profile.start_timestamp_s = static_cast<double>(*month_epoch);
        profile.noise_std_voltage_v = cfg.noise_std_voltage_v;
        profile.noise_std_current_a = cfg.noise_std_current_a;
        // seasonal offset per partition, intraday sinusoid within each day
        profile.temperature = {cfg.temp_mean_c + cfg.temp_seasonal_amplitude_c *
                                                     std::sin(2.0 * M_PI *
                                                              static_cast<double>(p) / 12.0),
                               cfg.temp_daily_amplitude_c, 86400.0, 0.0};

        // idle time split evenly between trips keeps every trip's geometry
        // identical; the remainder goes into the first rest of each day
        const double trips = static_cast<double>(cfg.trips_per_day);
        const double fill_total = 86400.0 - trips * (cfg.discharge_s + cfg.charge_s);
        const double rest_each = std::floor(fill_total / trips);
        const double rest_first = rest_each + (fill_total - rest_each * trips);
        for (std::size_t d = 0; d < cfg.days_per_partition; ++d) {
            for (std::size_t j = 0; j < cfg.trips_per_day; ++j) {
                const double level = cfg.current_levels_a[(d + j) % n_levels];
                profile.phases.push_back({j == 0 ? rest_first : rest_each, 0.0});
                profile.phases.push_back({cfg.discharge_s, -level});
                profile.phases.push_back({cfg.charge_s, level});
            }
        }
        // a closing rest so the last trip ends like every other one
        profile.phases.push_back({rest_each, 0.0});

        out.push_back({label, params.r0_ohm,
                       simulate(params, profile, seed + p, "sim-" + label)});
    }
    return out;
}

} // namespace rteff
