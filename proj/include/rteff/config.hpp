#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "rteff/errors.hpp"
#include "rteff/pipeline.hpp"
#include "rteff/scenario.hpp"

// JSON analysis configuration. Every value is optional; omitted keys keep
// the documented defaults. Unknown keys are ignored.

namespace rteff {

struct AnalysisConfig {
    AnalysisSettings settings;
    std::optional<ScenarioConfig> scenario;
};

namespace detail {

template <typename T>
void get_to_if(const nlohmann::json& j, const char* key, T& out) {
    if (const auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

inline void parse_ingestion(const nlohmann::json& j, IngestConfig& cfg) {
    if (const auto cols = j.find("columns"); cols != j.end()) {
        get_to_if(*cols, "timestamp", cfg.columns.timestamp);
        get_to_if(*cols, "current", cfg.columns.current);
        get_to_if(*cols, "voltage", cfg.columns.voltage);
        get_to_if(*cols, "temperature", cfg.columns.temperature);
        get_to_if(*cols, "soc", cfg.columns.soc);
    }
    get_to_if(j, "sampling_interval_s", cfg.sampling_interval_s);
    get_to_if(j, "gap_tolerance", cfg.gap_tolerance);
    get_to_if(j, "charge_positive", cfg.charge_positive);
    if (const auto it = j.find("temperature_range_c"); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw config_error("ingestion.temperature_range_c must be [min, max]");
        cfg.temp_min_c = (*it)[0].get<double>();
        cfg.temp_max_c = (*it)[1].get<double>();
    }
    get_to_if(j, "nominal_capacity_ah", cfg.nominal_capacity_ah);
    get_to_if(j, "initial_soc", cfg.initial_soc);
    get_to_if(j, "initial_soc_from_bms", cfg.initial_soc_from_bms);
    if (const auto it = j.find("soc_plausibility_band"); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw config_error("ingestion.soc_plausibility_band must be [lo, hi]");
        cfg.soc_band.lo = (*it)[0].get<double>();
        cfg.soc_band.hi = (*it)[1].get<double>();
    }
}

inline void parse_detector(const nlohmann::json& j, DetectorSettings& d) {
    if (const auto it = j.find("rest_current_max_a"); it != j.end() && !it->is_null()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "auto")
                throw config_error("detector.rest_current_max_a: number or \"auto\"");
        } else {
            d.rest_current_max_a = it->get<double>();
        }
    }
    get_to_if(j, "rest_duration_min_s", d.rest_duration_min_s);
    get_to_if(j, "soc_match_tolerance", d.soc_match_tolerance);
    get_to_if(j, "trip_duration_min_s", d.trip_duration_min_s);
    get_to_if(j, "trip_duration_max_s", d.trip_duration_max_s);
}

inline void parse_sensors(const nlohmann::json& j, SensorSpec& s) {
    get_to_if(j, "voltage_offset_v", s.voltage_offset_v);
    get_to_if(j, "voltage_gain_error", s.voltage_gain_error);
    get_to_if(j, "voltage_resolution_v", s.voltage_resolution_v);
    get_to_if(j, "current_offset_a", s.current_offset_a);
    get_to_if(j, "current_gain_error", s.current_gain_error);
    get_to_if(j, "current_resolution_a", s.current_resolution_a);
    get_to_if(j, "noise_estimation_window", s.noise_estimation_window);
    s.validate();
}

inline void parse_scenario(const nlohmann::json& j, ScenarioConfig& s) {
    get_to_if(j, "start_month", s.start_month);
    get_to_if(j, "partitions", s.partitions);
    get_to_if(j, "days_per_partition", s.days_per_partition);
    get_to_if(j, "trips_per_day", s.trips_per_day);
    get_to_if(j, "capacity_ah", s.capacity_ah);
    get_to_if(j, "initial_soc", s.initial_soc);
    if (const auto it = j.find("emf"); it != j.end()) {
        if (it->is_number()) {
            s.emf = EmfCurve::flat(it->get<double>());
        } else if (it->is_array()) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : *it) {
                if (!p.is_array() || p.size() != 2)
                    throw config_error("simulate.emf: number or [[soc, volts], ...]");
                pts.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            s.emf = EmfCurve(std::move(pts));
        } else {
            throw config_error("simulate.emf: number or [[soc, volts], ...]");
        }
    }
    get_to_if(j, "r0_ohm", s.r0_ohm);
    get_to_if(j, "r0_end_factor", s.r0_end_factor);
    get_to_if(j, "current_levels_a", s.current_levels_a);
    get_to_if(j, "discharge_s", s.discharge_s);
    get_to_if(j, "charge_s", s.charge_s);
    get_to_if(j, "rest_s", s.rest_s);
    get_to_if(j, "temp_mean_c", s.temp_mean_c);
    get_to_if(j, "temp_seasonal_amplitude_c", s.temp_seasonal_amplitude_c);
    get_to_if(j, "temp_daily_amplitude_c", s.temp_daily_amplitude_c);
    get_to_if(j, "noise_std_voltage_v", s.noise_std_voltage_v);
    get_to_if(j, "noise_std_current_a", s.noise_std_current_a);
    s.validate();
}

} // namespace detail

inline AnalysisConfig parse_config(const nlohmann::json& j) {
    AnalysisConfig cfg;
    AnalysisSettings& s = cfg.settings;
    try {
        if (const auto it = j.find("ingestion"); it != j.end())
            detail::parse_ingestion(*it, s.ingest);
        if (const auto it = j.find("detector"); it != j.end())
            detail::parse_detector(*it, s.detector);
        if (const auto it = j.find("sensors"); it != j.end())
            detail::parse_sensors(*it, s.sensors);
        if (const auto it = j.find("soc_source"); it != j.end()) {
            const auto v = it->get<std::string>();
            if (v == "constant")
                s.soc_source = SocSource::constant;
            else if (v == "bms")
                s.soc_source = SocSource::bms_trace;
            else
                throw config_error("soc_source: \"constant\" or \"bms\"");
        }
        if (const auto it = j.find("conditions"); it != j.end()) {
            detail::get_to_if(*it, "alpha", s.alpha);
            if (const auto pair = it->find("pair"); pair != it->end()) {
                if (pair->is_string()) {
                    if (pair->get<std::string>() != "auto")
                        throw config_error("conditions.pair: \"auto\" or two names");
                    s.condition_pair.reset();
                } else if (pair->is_array() && pair->size() == 2) {
                    s.condition_pair = std::array<std::string, 2>{
                        (*pair)[0].get<std::string>(), (*pair)[1].get<std::string>()};
                } else {
                    throw config_error("conditions.pair: \"auto\" or two names");
                }
            }
        }
        if (const auto it = j.find("partition"); it != j.end()) {
            std::string rule = "month";
            detail::get_to_if(*it, "rule", rule);
            if (rule == "month")
                s.partition_rule = PartitionRule::month;
            else if (rule == "day")
                s.partition_rule = PartitionRule::day;
            else
                throw config_error("partition.rule: \"month\" or \"day\"");
        }
        if (const auto it = j.find("reference"); it != j.end() && !it->is_null()) {
            if (it->is_string()) {
                if (it->get<std::string>() != "auto")
                    throw config_error("reference: \"auto\" or [c1, c2]");
            } else if (it->is_array() && it->size() == 2) {
                s.reference = {(*it)[0].get<double>(), (*it)[1].get<double>()};
            } else {
                throw config_error("reference: \"auto\" or [c1, c2]");
            }
        }
        if (const auto it = j.find("simulate"); it != j.end()) {
            ScenarioConfig sc;
            detail::parse_scenario(*it, sc);
            cfg.scenario = std::move(sc);
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (s.condition_pair) {
        for (const std::string& n : *s.condition_pair) {
            bool known = false;
            for (const char* k : kConditionNames) known = known || n == k;
            if (!known) throw config_error("conditions.pair: unknown condition " + n);
        }
    }
    return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace rteff
