#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "oracles.hpp"
#include "rteff/csv.hpp"
#include "rteff/rteff.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("rteff_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

int run_cli(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd =
        std::string(RTEFF_CLI_PATH) + " " + args + " 2>" + stderr_file;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

json fleet_config(int partitions, double r0_end_factor = 1.0, int trips_per_day = 6) {
    return json{{"ingestion", {{"nominal_capacity_ah", 100.0}, {"initial_soc", 0.9}}},
                {"simulate",
                 {{"start_month", "2022-01"},
                  {"partitions", partitions},
                  {"trips_per_day", trips_per_day},
                  {"capacity_ah", 100.0},
                  {"initial_soc", 0.9},
                  {"r0_ohm", 0.0975},
                  {"r0_end_factor", r0_end_factor},
                  {"noise_std_voltage_v", 0.02},
                  {"noise_std_current_a", 0.05}}}};
}

} // namespace

TEST_CASE("simulate is deterministic and round-trips through detect") {
    TempDir dir("simulate");
    write_file(dir.path / "config.json", fleet_config(2).dump());

    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 7 --out " +
                    dir.str("run1")) == 0);
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 7 --out " +
                    dir.str("run2")) == 0);
    REQUIRE(fs::exists(dir.path / "run1" / "sim-2022-01.csv"));
    REQUIRE(fs::exists(dir.path / "run1" / "sim-2022-02.csv"));
    CHECK(slurp(dir.path / "run1" / "sim-2022-01.csv") ==
          slurp(dir.path / "run2" / "sim-2022-01.csv"));
    CHECK(slurp(dir.path / "run1" / "simulate_manifest.json") ==
          slurp(dir.path / "run2" / "simulate_manifest.json"));

    // different seed, different bytes
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 8 --out " +
                    dir.str("run3")) == 0);
    CHECK(slurp(dir.path / "run1" / "sim-2022-01.csv") !=
          slurp(dir.path / "run3" / "sim-2022-01.csv"));

    // generated files re-ingest without schema overrides and without drops
    REQUIRE(run_cli("detect --config " + dir.str("config.json") + " --out " +
                    dir.str("det") + " " + dir.str("run1")) == 0);
    const json summary = json::parse(slurp(dir.path / "det" / "detect_summary.json"));
    CHECK(summary["parse"]["rows_dropped"].get<int>() == 0);
    // per partition: one 86400 s day plus the closing rest block
    const int rows_per_partition = 86400 + (86400 - 6 * 3600) / 6;
    CHECK(summary["parse"]["rows_read"].get<int>() == 2 * rows_per_partition);
    CHECK(summary["segments"].get<int>() == 2);
    CHECK(summary["trips"].get<int>() == 12);
    const double days = 2.0 * rows_per_partition / 86400.0;
    CHECK_THAT(summary["trips_per_day"].get<double>(), WithinAbs(12.0 / days, 1e-6));

    // trip count matches the literal brute-force detector on the same data
    rteff::IngestConfig ingest;
    ingest.nominal_capacity_ah = 100.0;
    ingest.initial_soc = 0.9;
    std::size_t brute_trips = 0;
    for (const auto& file : {"sim-2022-01.csv", "sim-2022-02.csv"}) {
        const auto parsed = rteff::parse_csv_file((dir.path / "run1" / file).string(), ingest);
        for (const auto& seg : parsed.segments) {
            const auto soc = rteff::compute_soc(seg);
            brute_trips +=
                oracle::brute_detect(seg, soc, rteff::DetectorConfig::defaults(100.0)).size();
        }
    }
    CHECK(brute_trips == 12);

    const std::string trips_csv = slurp(dir.path / "det" / "trips.csv");
    CHECK(trips_csv.rfind("segment_id,start_timestamp,end_timestamp,soc_start,soc_end,"
                          "duration_s\n",
                          0) == 0);
}

TEST_CASE("detect on an empty directory fails with exit 2") {
    TempDir dir("empty");
    fs::create_directories(dir.path / "nothing");
    write_file(dir.path / "config.json",
               json{{"ingestion", {{"nominal_capacity_ah", 100.0}}}}.dump());
    CHECK(run_cli("detect --config " + dir.str("config.json") + " --out " + dir.str("out") +
                  " " + dir.str("nothing")) == 2);
    CHECK(run_cli("detect --config " + dir.str("config.json") + " --out " + dir.str("out") +
                  " " + dir.str("missing_path")) == 2);
}

TEST_CASE("an all-rest file yields zero trips and exit 0") {
    TempDir dir("rest");
    std::ostringstream csv;
    csv << "timestamp,current,voltage,temperature\n";
    for (int k = 0; k < 4000; ++k) csv << (1640995200 + k) << ",0,650,15\n";
    write_file(dir.path / "quiet.csv", csv.str());
    write_file(dir.path / "config.json",
               json{{"ingestion", {{"nominal_capacity_ah", 100.0}}}}.dump());
    REQUIRE(run_cli("detect --config " + dir.str("config.json") + " --out " +
                    dir.str("out") + " " + dir.str("quiet.csv")) == 0);
    const json summary = json::parse(slurp(dir.path / "out" / "detect_summary.json"));
    CHECK(summary["trips"].get<int>() == 0);
    CHECK(slurp(dir.path / "out" / "trips.csv") ==
          "segment_id,start_timestamp,end_timestamp,soc_start,soc_end,duration_s\n");
}

TEST_CASE("analyze recovers the simulator-implied efficiency plane") {
    TempDir dir("analyze");
    write_file(dir.path / "config.json", fleet_config(1, 1.0, 12).dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 3 --out " +
                    dir.str("sim")) == 0);
    REQUIRE(run_cli("analyze --config " + dir.str("config.json") + " --out " +
                    dir.str("out") + " " + dir.str("sim")) == 0);

    REQUIRE(fs::exists(dir.path / "out" / "efficiency.csv"));
    REQUIRE(fs::exists(dir.path / "out" / "conditions_scatter.csv"));
    REQUIRE(fs::exists(dir.path / "out" / "correlations.json"));
    const json reg = json::parse(slurp(dir.path / "out" / "regression.json"));
    CHECK(reg["n_trips"].get<int>() == 12);
    CHECK(reg["condition_names"][0].get<std::string>() == "rms_crate");
    CHECK(reg["beta"][0].get<double>() < 0.0); // efficiency falls with C-rate

    // prediction at each level's conditions matches the closed form
    const double beta1 = reg["beta"][0].get<double>();
    const double beta2 = reg["beta"][1].get<double>();
    const double beta3 = reg["beta"][2].get<double>();
    rteff::IngestConfig ingest;
    ingest.nominal_capacity_ah = 100.0;
    ingest.initial_soc = 0.9;
    const auto parsed =
        rteff::parse_csv_file((dir.path / "sim" / "sim-2022-01.csv").string(), ingest);
    REQUIRE(parsed.segments.size() == 1);
    rteff::AnalysisSettings settings;
    settings.ingest = ingest;
    const auto sa = rteff::analyze_segment(parsed.segments[0], settings);
    REQUIRE(sa.trips.size() == 12);
    for (const auto& t : sa.trips) {
        const double eta_hat =
            beta1 * t.conditions.rms_crate + beta2 * t.conditions.temp_rt + beta3;
        CHECK_THAT(eta_hat, WithinAbs(t.estimate.eta, 5e-4));
    }
}

TEST_CASE("analyze honors an explicit condition pair") {
    TempDir dir("pair");
    json cfg = fleet_config(1);
    cfg["conditions"] = {{"pair", {"dod_rt", "temp_rt"}}};
    write_file(dir.path / "config.json", cfg.dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 3 --out " +
                    dir.str("sim")) == 0);
    // dod_rt varies across the three current levels, so the fit is full rank
    REQUIRE(run_cli("analyze --config " + dir.str("config.json") + " --out " +
                    dir.str("out") + " " + dir.str("sim")) == 0);
    const json reg = json::parse(slurp(dir.path / "out" / "regression.json"));
    CHECK(reg["condition_names"][0].get<std::string>() == "dod_rt");
    CHECK(reg["condition_names"][1].get<std::string>() == "temp_rt");
}

TEST_CASE("constant temperature surfaces as exit 3 naming temp_rt") {
    TempDir dir("degenerate");
    json cfg = fleet_config(1);
    cfg["simulate"]["temp_seasonal_amplitude_c"] = 0.0;
    cfg["simulate"]["temp_daily_amplitude_c"] = 0.0;
    write_file(dir.path / "config.json", cfg.dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 5 --out " +
                    dir.str("sim")) == 0);
    const int code = run_cli("analyze --config " + dir.str("config.json") + " --out " +
                                 dir.str("out") + " " + dir.str("sim"),
                             dir.str("stderr.txt"));
    CHECK(code == 3);
    CHECK(slurp(dir.path / "stderr.txt").find("temp_rt") != std::string::npos);
}

TEST_CASE("fade needs at least two fittable partitions") {
    TempDir dir("fade1");
    write_file(dir.path / "config.json", fleet_config(1).dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 5 --out " +
                    dir.str("sim")) == 0);
    CHECK(run_cli("fade --config " + dir.str("config.json") + " --out " + dir.str("out") +
                  " " + dir.str("sim")) == 3);
}

TEST_CASE("fade over identical-duty partitions is flat") {
    TempDir dir("fade0");
    write_file(dir.path / "config.json", fleet_config(3, 1.0).dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 11 --out " +
                    dir.str("sim")) == 0);
    REQUIRE(run_cli("fade --config " + dir.str("config.json") + " --out " + dir.str("out") +
                    " " + dir.str("sim")) == 0);
    const json fade = json::parse(slurp(dir.path / "out" / "fade.json"));
    REQUIRE(fade["points"].size() == 3);
    CHECK(std::fabs(fade["fade_pp"].get<double>()) < 0.02); // no aging, only noise
    CHECK(fade["points"][0]["partition_label"].get<std::string>() == "2022-01");
    CHECK(fade["points"][2]["partition_label"].get<std::string>() == "2022-03");
    REQUIRE(fs::exists(dir.path / "out" / "fade.csv"));
    const std::string csv = slurp(dir.path / "out" / "fade.csv");
    CHECK(csv.rfind("partition_label,eta_hat,ci95_lo,ci95_hi,moving_avg,n_trips\n", 0) == 0);
}

TEST_CASE("full pipeline reruns are byte-identical") {
    TempDir dir("determinism");
    write_file(dir.path / "config.json", fleet_config(2).dump());
    REQUIRE(run_cli("simulate --config " + dir.str("config.json") + " --seed 9 --out " +
                    dir.str("sim")) == 0);
    for (const char* run : {"a", "b"}) {
        REQUIRE(run_cli("analyze --config " + dir.str("config.json") + " --out " +
                        dir.str(run) + " " + dir.str("sim")) == 0);
        REQUIRE(run_cli("fade --config " + dir.str("config.json") + " --out " +
                        dir.str(std::string(run) + "f") + " " + dir.str("sim")) == 0);
    }
    for (const char* f :
         {"efficiency.csv", "conditions_scatter.csv", "correlations.json", "regression.json"})
        CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
    for (const char* f : {"fade.json", "fade.csv"})
        CHECK(slurp(dir.path / "af" / f) == slurp(dir.path / "bf" / f));
}

TEST_CASE("bad config and missing config file exit 2") {
    TempDir dir("badcfg");
    write_file(dir.path / "config.json", "{ not json");
    CHECK(run_cli("detect --config " + dir.str("config.json") + " --out " + dir.str("out") +
                  " " + dir.str()) == 2);
    CHECK(run_cli("detect --config " + dir.str("nope.json") + " --out " + dir.str("out") +
                  " " + dir.str()) == 2);

    // capacity missing entirely
    write_file(dir.path / "empty.json", "{}");
    std::ostringstream csv;
    csv << "timestamp,current,voltage,temperature\n0,0,650,15\n1,0,650,15\n";
    write_file(dir.path / "data.csv", csv.str());
    CHECK(run_cli("detect --config " + dir.str("empty.json") + " --out " + dir.str("out") +
                  " " + dir.str("data.csv")) == 2);

    // usage errors share the input/config exit code
    CHECK(run_cli("detect") == 2);
    CHECK(run_cli("no-such-command") == 2);
}
