#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rteff/errors.hpp"
#include "rteff/telemetry.hpp"
#include "rteff/timeutil.hpp"

// CSV ingestion: header-row column mapping, per-row validation, and gap
// splitting into uniformly sampled segments. Also the matching writer, so
// simulator output and parser input share one format.

namespace rteff {

/// Column-name mapping. An empty soc name means "no SoC column".
struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string current = "current";
    std::string voltage = "voltage";
    std::string temperature = "temperature";
    std::string soc;
};

struct IngestConfig {
    ColumnMap columns;
    double sampling_interval_s = 1.0;
    double gap_tolerance = 0.1;        // fraction of sampling_interval_s
    bool charge_positive = true;       // false: input is discharge-positive, negate
    double temp_min_c = -40.0;
    double temp_max_c = 80.0;
    double nominal_capacity_ah = 0.0;  // copied onto every segment
    double initial_soc = 0.5;          // SoC(t0) for every segment
    bool initial_soc_from_bms = false; // take SoC(t0) from the first mapped soc sample
    SocBand soc_band;
};

struct ParseReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::size_t dropped_parse = 0;        // unparseable or non-finite fields
    std::size_t dropped_voltage = 0;      // voltage <= 0
    std::size_t dropped_temperature = 0;  // outside configured range
    std::size_t segments = 0;
};

struct ParseResult {
    std::vector<TelemetrySeries> segments;
    ParseReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace detail

/// Parse CSV text into gap-free segments. Rows violating record invariants
/// are dropped and counted; a backward or duplicate timestamp is an error.
/// Timestamps may be epoch seconds or ISO-8601; the first data row decides.
inline ParseResult parse_csv(std::string_view text, const IngestConfig& cfg,
                             std::string_view source_label = "input") {
    ParseResult result;
    std::vector<std::string_view> lines_fields;

    // header
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw empty_input_error("empty CSV: " + std::string(source_label));
    detail::split_fields(header, lines_fields);

    auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < lines_fields.size(); ++i)
            if (detail::trim(lines_fields[i]) == name) return i;
        return std::nullopt;
    };

    const auto ts_col = find_column(cfg.columns.timestamp);
    if (!ts_col) throw schema_error(cfg.columns.timestamp);
    const auto i_col = find_column(cfg.columns.current);
    if (!i_col) throw schema_error(cfg.columns.current);
    const auto u_col = find_column(cfg.columns.voltage);
    if (!u_col) throw schema_error(cfg.columns.voltage);
    const auto t_col = find_column(cfg.columns.temperature);
    if (!t_col) throw schema_error(cfg.columns.temperature);
    std::optional<std::size_t> soc_col;
    if (!cfg.columns.soc.empty()) {
        soc_col = find_column(cfg.columns.soc);
        if (!soc_col) throw schema_error(cfg.columns.soc);
    }
    const std::size_t max_col =
        std::max({*ts_col, *i_col, *u_col, *t_col, soc_col.value_or(0)});

    const double lo_dt = cfg.sampling_interval_s * (1.0 - cfg.gap_tolerance);
    const double hi_dt = cfg.sampling_interval_s * (1.0 + cfg.gap_tolerance);

    auto start_segment = [&]() -> TelemetrySeries& {
        TelemetrySeries s;
        s.sampling_interval_s = cfg.sampling_interval_s;
        s.nominal_capacity_ah = cfg.nominal_capacity_ah;
        s.initial_soc = cfg.initial_soc;
        s.segment_id = result.segments.empty()
                           ? std::string(source_label)
                           : std::string(source_label) + "#" +
                                 std::to_string(result.segments.size() + 1);
        result.segments.push_back(std::move(s));
        return result.segments.back();
    };

    enum class TsMode { undecided, epoch, iso8601 };
    TsMode ts_mode = TsMode::undecided;
    double last_ts = 0.0;
    bool have_last = false;
    std::size_t line_no = 1; // header was line 1

    std::string_view line;
    while (next_line(line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        ++result.report.rows_read;
        detail::split_fields(line, lines_fields);
        if (lines_fields.size() <= max_col) {
            ++result.report.dropped_parse;
            continue;
        }

        double ts = 0.0;
        bool ts_ok = false;
        if (ts_mode == TsMode::undecided) {
            if (detail::parse_double(lines_fields[*ts_col], ts)) {
                ts_mode = TsMode::epoch;
                ts_ok = true;
            } else if (const auto iso = timeutil::parse_iso8601(lines_fields[*ts_col])) {
                ts_mode = TsMode::iso8601;
                ts = *iso;
                ts_ok = true;
            }
        } else if (ts_mode == TsMode::epoch) {
            ts_ok = detail::parse_double(lines_fields[*ts_col], ts);
        } else {
            const auto iso = timeutil::parse_iso8601(lines_fields[*ts_col]);
            if (iso) {
                ts = *iso;
                ts_ok = true;
            }
        }

        TelemetryRecord rec{};
        rec.timestamp_s = ts;
        if (!ts_ok || !detail::parse_double(lines_fields[*i_col], rec.current_a) ||
            !detail::parse_double(lines_fields[*u_col], rec.voltage_v) ||
            !detail::parse_double(lines_fields[*t_col], rec.temperature_c)) {
            ++result.report.dropped_parse;
            continue;
        }
        double soc_val = 0.0;
        if (soc_col && !detail::parse_double(lines_fields[*soc_col], soc_val)) {
            ++result.report.dropped_parse;
            continue;
        }
        if (!cfg.charge_positive) rec.current_a = -rec.current_a;
        if (!(rec.voltage_v > 0.0)) {
            ++result.report.dropped_voltage;
            continue;
        }
        if (rec.temperature_c < cfg.temp_min_c || rec.temperature_c > cfg.temp_max_c) {
            ++result.report.dropped_temperature;
            continue;
        }

        if (have_last && rec.timestamp_s <= last_ts)
            throw data_order_error("non-monotonic timestamp at line " +
                                       std::to_string(line_no) + " of " +
                                       std::string(source_label),
                                   line_no);
        const bool gap =
            have_last && (rec.timestamp_s - last_ts < lo_dt || rec.timestamp_s - last_ts > hi_dt);
        if (!have_last || gap || result.segments.empty()) {
            TelemetrySeries& seg = start_segment();
            if (soc_col && cfg.initial_soc_from_bms) seg.initial_soc = soc_val;
        }
        TelemetrySeries& seg = result.segments.back();
        seg.records.push_back(rec);
        if (soc_col) seg.bms_soc.push_back(soc_val);
        last_ts = rec.timestamp_s;
        have_last = true;
        ++result.report.rows_kept;
    }

    result.report.rows_dropped =
        result.report.rows_read - result.report.rows_kept;
    result.report.segments = result.segments.size();
    if (result.report.rows_kept == 0)
        throw empty_input_error("no valid rows in " + std::string(source_label));
    return result;
}

inline ParseResult parse_csv_file(const std::string& path, const IngestConfig& cfg,
                                  std::string_view source_label = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string label(source_label);
    if (label.empty()) {
        const std::size_t slash = path.find_last_of("/\\");
        label = slash == std::string::npos ? path : path.substr(slash + 1);
        const std::size_t dot = label.find_last_of('.');
        if (dot != std::string::npos && dot > 0) label = label.substr(0, dot);
    }
    const std::string text = buf.str();
    return parse_csv(text, cfg, label);
}

/// Shortest round-trip decimal form of a double (exact re-parse).
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Write a series in the format parse_csv consumes with default columns.
inline void write_telemetry_csv(const TelemetrySeries& series, std::ostream& out) {
    const bool with_soc = series.bms_soc.size() == series.records.size() &&
                          !series.records.empty() && !series.bms_soc.empty();
    out << "timestamp,current,voltage,temperature";
    if (with_soc) out << ",soc";
    out << '\n';
    for (std::size_t k = 0; k < series.records.size(); ++k) {
        const TelemetryRecord& r = series.records[k];
        out << format_double(r.timestamp_s) << ',' << format_double(r.current_a) << ','
            << format_double(r.voltage_v) << ',' << format_double(r.temperature_c);
        if (with_soc) out << ',' << format_double(series.bms_soc[k]);
        out << '\n';
    }
}

} // namespace rteff
