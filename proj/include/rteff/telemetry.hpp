#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rteff/errors.hpp"

namespace rteff {

/// One BMS sample. Current is charge-positive: I > 0 charges the pack,
/// I < 0 discharges it.
struct TelemetryRecord {
    double timestamp_s;    // seconds since epoch
    double current_a;      // amperes, charge-positive
    double voltage_v;      // terminal voltage, volts
    double temperature_c;  // pack average, degrees Celsius
};

/// A gap-free segment of uniformly sampled telemetry.
struct TelemetrySeries {
    std::vector<TelemetryRecord> records;
    double sampling_interval_s = 1.0;   // Δt
    double nominal_capacity_ah = 0.0;   // C_n
    double initial_soc = 0.0;           // SoC at the first sample's start
    std::string segment_id;
    std::vector<double> bms_soc;        // optional BMS-reported SoC, empty if absent

    std::size_t size() const { return records.size(); }
    double duration_s() const {
        return records.empty() ? 0.0 : static_cast<double>(records.size()) * sampling_interval_s;
    }
};

/// How the SoC trace and its starting value were obtained.
enum class SocOrigin { coulomb_counting, bms_column };

/// SoC aligned 1:1 with a parent series. soc[k] is the state after sample k
/// has acted (the coulomb-count sum includes sample k).
struct SocTrace {
    std::vector<double> soc;
    SocOrigin origin = SocOrigin::coulomb_counting;
    bool plausibility_warning = false;
    std::optional<std::size_t> first_violation_index;
};

struct SocBand {
    double lo = -0.05;
    double hi = 1.05;
};

/// Coulomb counting: soc[k] = SoC(t0) + (Δt / (3600 C_n)) Σ_{j<=k} I(t_j).
/// A band violation sets the warning flag; the trace is still returned.
inline SocTrace compute_soc(const TelemetrySeries& series, SocBand band = {}) {
    if (!(series.nominal_capacity_ah > 0.0))
        throw config_error("compute_soc: nominal capacity must be positive");
    SocTrace trace;
    trace.origin = SocOrigin::coulomb_counting;
    trace.soc.resize(series.records.size());
    const double factor = series.sampling_interval_s / (3600.0 * series.nominal_capacity_ah);
    double s = series.initial_soc;
    for (std::size_t k = 0; k < series.records.size(); ++k) {
        s += series.records[k].current_a * factor;
        trace.soc[k] = s;
        if (!trace.plausibility_warning && (s < band.lo || s > band.hi)) {
            trace.plausibility_warning = true;
            trace.first_violation_index = k;
        }
    }
    return trace;
}

/// SoC trace taken verbatim from the BMS-reported column.
inline SocTrace soc_from_bms(const TelemetrySeries& series, SocBand band = {}) {
    if (series.bms_soc.size() != series.records.size())
        throw config_error("soc_from_bms: series carries no aligned BMS SoC column");
    SocTrace trace;
    trace.origin = SocOrigin::bms_column;
    trace.soc = series.bms_soc;
    for (std::size_t k = 0; k < trace.soc.size(); ++k) {
        if (trace.soc[k] < band.lo || trace.soc[k] > band.hi) {
            trace.plausibility_warning = true;
            trace.first_violation_index = k;
            break;
        }
    }
    return trace;
}

} // namespace rteff
