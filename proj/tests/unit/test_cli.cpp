#include "doctest.h"
#include "support.hpp"

#include "sonotrans/cli/commands.hpp"
#include "sonotrans/cli/config.hpp"
#include "sonotrans/cli/outputs.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace sonotrans;
using namespace sonotrans::cli;
using testing::rel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sonotrans_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(SONOTRANS_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path config_file(const std::string& name) { return fs::path(SONOTRANS_CONFIGS) / name; }

void collect_keys(const nlohmann::json& doc, const std::string& prefix, std::set<std::string>& out) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        out.insert(key);
        if (it->is_object()) collect_keys(*it, key, out);
    }
}

void collect_schema_keys(const nlohmann::json& schema, const std::string& prefix, std::set<std::string>& out) {
    if (!schema.contains("properties")) return;
    for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        out.insert(key);
        collect_schema_keys(*it, key, out);
    }
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("empty document gives defaults") {
        const auto c = parse_config("{}");
        CHECK(c.kind == RunKind::independent);
        CHECK(c.scenario.array.pitch == 0.0103);
        CHECK(c.scenario.dt == 1e-4);
        CHECK_FALSE(c.seed.has_value());
    }
    SUBCASE("round trip") {
        for (const char* name : {"independent.json", "cooperative_ir.json", "cooperative_wifi.json", "sync_ir.json",
                                 "sync_wifi.json"}) {
            const auto c = parse_config(slurp(config_file(name)));
            const auto again = parse_config(serialize_config(c));
            CHECK(again == c);
            CHECK(serialize_config(again) == serialize_config(c));
        }
    }
    SUBCASE("non-positive pitch names the key") {
        try {
            static_cast<void>(parse_config(R"({"array": {"pitch": 0}})"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.key() == "array.pitch");
        }
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config(R"({"arrray": {}})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"array": {"pitchh": 0.01}})"), ConfigError);
    }
    SUBCASE("stochastic runs need a seed") {
        CHECK_THROWS_AS(parse_config(R"({"kind": "sync"})"), ConfigError);
        CHECK_NOTHROW(parse_config(R"({"kind": "sync", "seed": 3})"));
        CHECK_NOTHROW(parse_config(R"({"kind": "cooperative"})"));
        CHECK_THROWS_AS(parse_config(R"({"kind": "cooperative", "clock": {"ideal": false}})"), ConfigError);
    }
    SUBCASE("malformed text") {
        CHECK_THROWS(parse_config("{\"kind\": "));
        CHECK_THROWS_AS(parse_config(R"({"dt": 0.01})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"kind": "sideways"})"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"dt": "fast"})"), ConfigError);
    }
    SUBCASE("seed reaches both oscillators") {
        auto c = parse_config(slurp(config_file("cooperative_ir.json")));
        const auto s = resolve_scenario(c, SONOTRANS_CONFIGS);
        CHECK(s.clock.leader.rng_seed == *c.seed);
        CHECK(s.clock.follower.rng_seed == *c.seed);
    }
    SUBCASE("amplitude resolution") {
        auto c = parse_config(slurp(config_file("independent.json")));
        CHECK(resolve_scenario(c, SONOTRANS_CONFIGS).array.amplitude.reference_amplitude ==
              rel(4.142326149054925, 1e-15));
        c.calibration_file.reset();
        CHECK(resolve_scenario(c, SONOTRANS_CONFIGS).array.amplitude.reference_amplitude ==
              rel(4.142326149054925, 1e-12));
        c.reference_amplitude = 2.5;
        CHECK(resolve_scenario(c).array.amplitude.reference_amplitude == 2.5);
        c.unit_amplitude = true;
        CHECK(resolve_scenario(c).array.amplitude.kind == field::AmplitudeKind::unit);
    }
    SUBCASE("derived seeds differ") {
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(7, i));
        CHECK(seen.size() == 100);
        CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    }
}

TEST_CASE("schema matches the canonical config") {
    const auto schema = nlohmann::json::parse(slurp(fs::path(SONOTRANS_SCHEMA) / "scenario.schema.json"));
    std::set<std::string> from_schema;
    std::set<std::string> from_config;
    collect_schema_keys(schema, "", from_schema);
    collect_keys(to_json(parse_config(R"({"seed": 1})")), "", from_config);
    CHECK(from_schema == from_config);
}

TEST_CASE("field raster") {
    auto c = parse_config("{}");
    c.reference_amplitude = 4.142326149054925;
    const auto scenario = resolve_scenario(c);
    const auto setup = field_setup(scenario, RunKind::independent);

    SliceSpec slice;
    slice.plane = "xy";
    slice.center = Vec3(0, 0, 0.05);
    const auto raster = field_raster(setup, scenario, slice);
    CHECK(raster.size() == 10201);

    SUBCASE("focused maximum") {
        auto plain = scenario;
        plain.array.twin_trap = false;
        auto argmax = [&](const transport::Scenario& sc, double extent, int resolution) {
            SliceSpec spec;
            spec.plane = "xz";
            spec.center = Vec3(0, 0, 0.05);
            spec.extent = extent;
            spec.resolution = resolution;
            const auto r = field_raster(field_setup(sc, RunKind::independent), sc, spec);
            std::size_t best = 0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (r[i].magnitude > r[best].magnitude) best = i;
            }
            return r[best].point;
        };
        // Unit phasors peak exactly at the focus.
        auto unit = plain;
        unit.array.amplitude = field::AmplitudeModel::unit();
        const double cell = 0.02 / 40;
        const Vec3 p_unit = argmax(unit, 0.02, 41);
        CHECK(std::abs(p_unit.x()) <= cell);
        CHECK(std::abs(p_unit.z() - 0.05) <= cell);
        // With 1/d spreading the peak moves toward the array; the coarse raster still finds it.
        const Vec3 coarse = argmax(plain, 0.02, 41);
        const Vec3 fine = argmax(plain, 0.02, 401);
        CHECK(std::abs(coarse.x() - fine.x()) <= cell);
        CHECK(std::abs(coarse.z() - fine.z()) <= cell);
    }
    SUBCASE("single element is radially symmetric") {
        auto one = scenario;
        one.array.rows = 1;
        one.array.cols = 1;
        const auto s = field_setup(one, RunKind::independent);
        const std::array<field::PhasedArray, 1> arrays{s.arrays[0]};
        for (double r : {0.01, 0.03}) {
            const double a = std::abs(field::complex_pressure(arrays, Vec3(r, 0, 0.02), one.array.amplitude, one.medium));
            const double b = std::abs(field::complex_pressure(arrays, Vec3(0, -r, 0.02), one.array.amplitude, one.medium));
            const double d = std::abs(field::complex_pressure(
                arrays, Vec3(r * std::sqrt(0.5), r * std::sqrt(0.5), 0.02), one.array.amplitude, one.medium));
            CHECK(a == rel(b, 1e-12));
            CHECK(a == rel(d, 1e-12));
        }
    }
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("exit_codes");

    SUBCASE("malformed config") {
        const fs::path bad = dir / "bad.json";
        std::ofstream(bad) << "{\"kind\": ";
        CHECK(run_binary("run --config " + bad.string() + " --out " + (dir / "bad").string()) == 1);
        const fs::path unknown = dir / "unknown.json";
        std::ofstream(unknown) << R"({"velocty": 0.05})";
        CHECK(run_binary("run --config " + unknown.string()) == 1);
        CHECK(run_binary("no-such-command") == 1);
    }
    SUBCASE("independent default run is retained") {
        const fs::path out = dir / "independent";
        CHECK(run_binary("run --config " + config_file("independent.json").string() + " --out " + out.string()) == 0);
        CHECK(fs::exists(out / "trace.csv"));
        const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
        CHECK(metrics["retained"] == true);
        const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
        CHECK(summary.contains("config_digest"));
        CHECK(summary.contains("version"));
    }
    SUBCASE("cooperative over Wi-Fi drops the bead") {
        const fs::path out = dir / "wifi";
        CHECK(run_binary("run --config " + config_file("cooperative_wifi.json").string() + " --out " + out.string()) ==
              2);
        CHECK(nlohmann::json::parse(slurp(out / "metrics.json"))["retained"] == false);
    }
}

TEST_CASE("runs are reproducible byte for byte") {
    const fs::path dir = scratch("repro");
    auto doc = nlohmann::json::parse(slurp(config_file("cooperative_ir.json")));
    doc["duration"] = 0.5;
    doc.erase("calibration_file");
    const fs::path cfg = dir / "short.json";
    std::ofstream(cfg) << doc.dump(2);
    for (const char* run : {"a", "b"}) {
        REQUIRE(run_binary("run --config " + cfg.string() + " --out " + (dir / run).string()) == 0);
    }
    for (const char* file : {"trace.csv", "sync.csv", "sync_summary.json", "metrics.json"}) {
        CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
    }
    const auto a = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
    const auto b = nlohmann::json::parse(slurp(dir / "b" / "summary.json"));
    CHECK(a["config_digest"] == b["config_digest"]);

    SUBCASE("a different seed changes the clock trace") {
        REQUIRE(run_binary("run --config " + cfg.string() + " --seed 99 --out " + (dir / "c").string()) == 0);
        CHECK(slurp(dir / "a" / "sync.csv") != slurp(dir / "c" / "sync.csv"));
    }
}

TEST_CASE("sweep and sync commands") {
    const fs::path dir = scratch("sweep");
    const std::string sync_cfg = config_file("sync_ir.json").string();
    REQUIRE(run_binary("sync --config " + sync_cfg + " --out " + (dir / "sync").string()) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "sync" / "sync_summary.json"));
    CHECK(summary.contains("levitation_stability"));

    REQUIRE(run_binary("sweep --config " + sync_cfg + " --param clock.detection_jitter --values 4e-7,8e-7,1.6e-6 "
                       "--replicates 2 --out " + (dir / "sweep").string()) == 0);
    std::istringstream csv(slurp(dir / "sweep" / "sweep.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("param,value,replicate,seed", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 6);
}
