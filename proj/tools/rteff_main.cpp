// rteff: battery round-trip efficiency and fade analytics.
//
// Subcommands: simulate (synthetic telemetry), detect (round trips),
// analyze (efficiency, conditions, regression), fade (per-partition
// efficiency at reference conditions over calendar time).
//
// Exit codes: 0 success (possibly with warnings), 2 input or configuration
// error, 3 analysis infeasibility (too little data, degenerate design).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rteff/config.hpp"
#include "rteff/report.hpp"
#include "rteff/rteff.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LoadedData {
    std::vector<rteff::TelemetrySeries> segments;
    rteff::ParseReport report;
    std::size_t warnings = 0;
    std::vector<std::string> messages;
};

std::vector<fs::path> gather_inputs(const std::vector<std::string>& args) {
    std::vector<fs::path> files;
    for (const std::string& arg : args) {
        const fs::path p(arg);
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file() && entry.path().extension() == ".csv")
                    files.push_back(entry.path());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw rteff::config_error("input path not found: " + arg);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw rteff::empty_input_error("no input CSV files");
    return files;
}

LoadedData load_inputs(const std::vector<std::string>& args,
                       const rteff::AnalysisSettings& settings) {
    if (!(settings.ingest.nominal_capacity_ah > 0.0))
        throw rteff::config_error(
            "ingestion.nominal_capacity_ah must be set to a positive value");
    LoadedData data;
    for (const fs::path& file : gather_inputs(args)) {
        try {
            rteff::ParseResult r = rteff::parse_csv_file(file.string(), settings.ingest);
            for (auto& seg : r.segments) data.segments.push_back(std::move(seg));
            data.report.rows_read += r.report.rows_read;
            data.report.rows_kept += r.report.rows_kept;
            data.report.rows_dropped += r.report.rows_dropped;
            data.report.dropped_parse += r.report.dropped_parse;
            data.report.dropped_voltage += r.report.dropped_voltage;
            data.report.dropped_temperature += r.report.dropped_temperature;
            if (r.report.rows_dropped > 0) {
                ++data.warnings;
                data.messages.push_back(file.filename().string() + ": dropped " +
                                        std::to_string(r.report.rows_dropped) + " rows");
            }
        } catch (const rteff::error& e) {
            ++data.warnings;
            data.messages.push_back(file.filename().string() + ": skipped (" + e.what() +
                                    ")");
        }
    }
    data.report.segments = data.segments.size();
    if (data.segments.empty())
        throw rteff::empty_input_error("no usable telemetry in the given inputs");
    return data;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rteff::config_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void print_warnings(const LoadedData& data) {
    for (const std::string& m : data.messages) std::cerr << "warning: " << m << "\n";
}

std::vector<rteff::TripAnalysis> run_pipeline(const LoadedData& data,
                                              const rteff::AnalysisSettings& settings,
                                              std::size_t& warnings) {
    std::vector<rteff::TripAnalysis> trips;
    for (const rteff::TelemetrySeries& seg : data.segments) {
        rteff::SegmentAnalysis sa = rteff::analyze_segment(seg, settings);
        warnings += sa.diagnostics.size();
        for (const std::string& d : sa.diagnostics) std::cerr << "warning: " << d << "\n";
        for (auto& t : sa.trips) trips.push_back(std::move(t));
    }
    return trips;
}

int cmd_detect(const std::vector<std::string>& inputs, const rteff::AnalysisConfig& cfg,
               const fs::path& out_dir) {
    const LoadedData data = load_inputs(inputs, cfg.settings);
    print_warnings(data);

    std::vector<rteff::TripAnalysis> trips;
    double total_duration_s = 0.0;
    for (const rteff::TelemetrySeries& seg : data.segments) {
        total_duration_s += seg.duration_s();
        rteff::SocTrace soc;
        if (cfg.settings.soc_source == rteff::SocSource::bms_trace &&
            seg.bms_soc.size() == seg.records.size())
            soc = rteff::soc_from_bms(seg, cfg.settings.ingest.soc_band);
        else
            soc = rteff::compute_soc(seg, cfg.settings.ingest.soc_band);
        const auto detector = cfg.settings.resolved_detector(seg.nominal_capacity_ah);
        for (const rteff::RoundTrip& trip : rteff::detect_round_trips(seg, soc, detector)) {
            rteff::TripAnalysis t;
            t.segment_id = seg.segment_id;
            t.start_timestamp_s = seg.records[trip.start_index].timestamp_s;
            t.end_timestamp_s = seg.records[trip.end_index].timestamp_s;
            t.soc_start = soc.soc[trip.start_index];
            t.soc_end = soc.soc[trip.end_index];
            t.duration_s = trip.duration_s(seg);
            trips.push_back(std::move(t));
        }
    }

    std::ostringstream csv;
    rteff::write_trips_csv(trips, csv);
    write_text(out_dir / "trips.csv", csv.str());

    const double days = total_duration_s / 86400.0;
    json summary = {{"segments", data.segments.size()},
                    {"trips", trips.size()},
                    {"trips_per_day",
                     rteff::round9(days > 0.0 ? static_cast<double>(trips.size()) / days : 0.0)},
                    {"parse", rteff::to_json(data.report)},
                    {"warnings", data.warnings}};
    write_json(out_dir / "detect_summary.json", summary);

    if (trips.empty()) std::cerr << "warning: no round trips detected\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& inputs, const rteff::AnalysisConfig& cfg,
                const fs::path& out_dir) {
    const LoadedData data = load_inputs(inputs, cfg.settings);
    print_warnings(data);
    std::size_t warnings = data.warnings;
    const std::vector<rteff::TripAnalysis> trips = run_pipeline(data, cfg.settings, warnings);

    std::ostringstream eff_csv, scatter_csv;
    rteff::write_efficiency_csv(trips, eff_csv);
    write_text(out_dir / "efficiency.csv", eff_csv.str());
    rteff::write_scatter_csv(trips, scatter_csv);
    write_text(out_dir / "conditions_scatter.csv", scatter_csv.str());

    const rteff::ConditionPairSelection sel =
        rteff::select_condition_pair(trips, cfg.settings);
    if (sel.fallback_used)
        std::cerr << "warning: fewer than 2 significant conditions, using default pair\n";
    write_json(out_dir / "correlations.json", rteff::correlations_json(sel, sel.ranking));

    rteff::RegressionModel model =
        rteff::fit_wls(rteff::to_observations(trips, sel.names), {sel.names[0], sel.names[1]});
    json reg = rteff::to_json(model);
    reg["warnings"] = warnings;
    reg["trips_analyzed"] = trips.size();
    write_json(out_dir / "regression.json", reg);
    return 0;
}

int cmd_fade(const std::vector<std::string>& inputs, const rteff::AnalysisConfig& cfg,
             const fs::path& out_dir) {
    const LoadedData data = load_inputs(inputs, cfg.settings);
    print_warnings(data);
    std::size_t warnings = data.warnings;
    const std::vector<rteff::TripAnalysis> trips = run_pipeline(data, cfg.settings, warnings);

    const rteff::ConditionPairSelection sel =
        rteff::select_condition_pair(trips, cfg.settings);
    const std::vector<rteff::FadePartition> partitions =
        rteff::partition_trips(trips, sel.names, cfg.settings.partition_rule);
    rteff::FadeReport report = rteff::build_fade_report(partitions, cfg.settings.reference,
                                                        {sel.names[0], sel.names[1]});
    for (const auto& [label, reason] : report.skipped)
        std::cerr << "warning: partition " << label << " skipped: " << reason << "\n";

    write_json(out_dir / "fade.json", rteff::to_json(report));
    std::ostringstream csv;
    rteff::write_fade_csv(report, csv);
    write_text(out_dir / "fade.csv", csv.str());
    return 0;
}

int cmd_simulate(const rteff::AnalysisConfig& cfg, std::uint64_t seed,
                 const fs::path& out_dir) {
    if (!cfg.scenario)
        throw rteff::config_error("simulate requires a \"simulate\" section in the config");
    const std::vector<rteff::ScenarioSegment> segments =
        rteff::build_scenario(*cfg.scenario, seed);
    json manifest = json::array();
    for (const rteff::ScenarioSegment& seg : segments) {
        const fs::path file = out_dir / ("sim-" + seg.label + ".csv");
        std::ostringstream csv;
        rteff::write_telemetry_csv(seg.series, csv);
        write_text(file, csv.str());
        manifest.push_back({{"label", seg.label},
                            {"file", file.filename().string()},
                            {"samples", seg.series.records.size()},
                            {"r0_ohm", rteff::round9(seg.r0_ohm)}});
    }
    write_json(out_dir / "simulate_manifest.json", manifest);
    std::cout << "wrote " << segments.size() << " segment(s) to " << out_dir.string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"battery round-trip efficiency and fade analytics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::vector<std::string> inputs;

    auto* detect = app.add_subcommand("detect", "detect round trips, write audit CSV");
    auto* analyze =
        app.add_subcommand("analyze", "per-trip efficiency, correlations, regression");
    auto* fade = app.add_subcommand("fade", "per-partition efficiency fade report");
    auto* simulate = app.add_subcommand("simulate", "generate synthetic telemetry");

    for (CLI::App* sub : {detect, analyze, fade, simulate}) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", out_dir, "output directory");
    }
    for (CLI::App* sub : {detect, analyze, fade})
        sub->add_option("inputs", inputs, "telemetry CSV files or directories")->required();
    simulate->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems fall under the input/config exit code
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        rteff::AnalysisConfig cfg;
        if (!config_path.empty()) cfg = rteff::load_config(config_path);
        std::filesystem::create_directories(out_dir);
        if (detect->parsed()) return cmd_detect(inputs, cfg, out_dir);
        if (analyze->parsed()) return cmd_analyze(inputs, cfg, out_dir);
        if (fade->parsed()) return cmd_fade(inputs, cfg, out_dir);
        if (simulate->parsed()) return cmd_simulate(cfg, seed, out_dir);
    } catch (const rteff::insufficient_data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const rteff::degenerate_design_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const rteff::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
