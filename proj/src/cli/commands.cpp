#include "sonotrans/cli/commands.hpp"

#include "sonotrans/cli/outputs.hpp"
#include "sonotrans/field_source.hpp"
#include "sonotrans/gorkov.hpp"
#include "sonotrans/version.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"

namespace sonotrans::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFaceToFaceReference = 7106.3;

struct Loaded {
    ScenarioConfig config;
    std::string canonical;  ///< serialized effective config, digested for RunSummary
    std::string config_dir;
    std::string out_dir;
};

Loaded load(const CommonOptions& options) {
    Loaded l;
    l.config = parse_config_document(load_config_document(options));
    l.canonical = serialize_config(l.config);
    l.config_dir = options.config_path ? fs::path(*options.config_path).parent_path().string() : std::string{};
    if (l.config_dir.empty()) l.config_dir = ".";
    l.out_dir = options.out_dir ? *options.out_dir : l.config.output_dir;
    fs::create_directories(l.out_dir);
    return l;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

template <typename Writer>
std::string to_text(Writer&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

clock::SyncTrace simulate_clock(const transport::Scenario& s) {
    return clock::simulate_sync(s.clock.leader, s.clock.follower, s.clock.protocol, s.duration,
                                s.clock.sample_interval);
}

void write_sync_outputs(const clock::SyncTrace& trace, const MediumParams& medium, const std::string& out_dir,
                        OutputFormat format) {
    if (format == OutputFormat::csv) {
        write_file(join(out_dir, "sync.csv"), to_text([&](std::ostream& o) { write_sync_csv(o, trace); }));
    } else {
        write_file(join(out_dir, "sync.json"), sync_json(trace).dump(2) + "\n");
    }
    const auto summary = clock::summarize(trace, medium);
    const auto stability = clock::classify_levitation_stability(trace, medium);
    write_file(join(out_dir, "sync_summary.json"), sync_summary_json(summary, stability).dump(2) + "\n");
}

Vec3 parse_center(const std::string& text) {
    std::stringstream in(text);
    Vec3 v;
    char comma = 0;
    if (!(in >> v.x() >> comma >> v.y() >> comma >> v.z()) || !in.eof()) {
        throw ConfigError("--center", "expected x,y,z, got '" + text + "'");
    }
    return v;
}

}  // namespace

FieldSetup field_setup(const transport::Scenario& scenario, RunKind kind) {
    FieldSetup setup;
    const auto& ac = scenario.array;
    if (kind == RunKind::independent) {
        setup.arrays.push_back(transport::single_sided_array(ac, scenario.medium, ac.twin_trap));
        setup.default_center = Vec3(0.0, 0.0, ac.focal_distance);
    } else {
        const auto local = transport::face_to_face_arrays(ac, scenario.medium, kPi);
        setup.arrays.push_back(local[0].reposed(facing_pose(Vec3::Zero(), 0.0)));
        setup.arrays.push_back(local[1].reposed(facing_pose(Vec3(ac.separation, 0.0, 0.0), kPi)));
        setup.default_center = Vec3(0.5 * ac.separation, 0.0, 0.0);
    }
    return setup;
}

std::vector<field::FieldSample> field_raster(const FieldSetup& setup, const transport::Scenario& scenario,
                                             const SliceSpec& slice) {
    if (slice.resolution < 1) throw ConfigError("--resolution", "expected a positive integer");
    if (!(slice.extent >= 0.0)) throw ConfigError("--extent", "expected a non-negative length");
    Vec3 e1;
    Vec3 e2;
    if (slice.plane == "xy") {
        e1 = Vec3::UnitX();
        e2 = Vec3::UnitY();
    } else if (slice.plane == "xz") {
        e1 = Vec3::UnitX();
        e2 = Vec3::UnitZ();
    } else if (slice.plane == "yz") {
        e1 = Vec3::UnitY();
        e2 = Vec3::UnitZ();
    } else {
        throw ConfigError("--plane", "expected xy, xz or yz, got '" + slice.plane + "'");
    }
    const Vec3 center = slice.center.value_or(setup.default_center);
    const int n = slice.resolution;
    const double step = n > 1 ? slice.extent / (n - 1) : 0.0;
    const double half = n > 1 ? 0.5 * slice.extent : 0.0;

    const field::ArrayFieldSource source(setup.arrays, scenario.array.amplitude, scenario.medium);
    const field::GorkovEvaluator evaluator(source, scenario.gorkov_mode, scenario.particle,
                                           scenario.environment.gravity);

    std::vector<field::FieldSample> raster;
    raster.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            field::FieldSample cell;
            cell.point = center + (-half + j * step) * e1 + (-half + i * step) * e2;
            if (source.min_source_distance(cell.point) < field::kSingularityGuard) {
                cell.complex_pressure = {kNaN, kNaN};
                cell.magnitude = kNaN;
            } else {
                cell.complex_pressure = source.pressure(cell.point);
                cell.magnitude = std::abs(cell.complex_pressure);
                try {
                    cell.gorkov_u = evaluator.potential(cell.point);
                } catch (const SingularityError&) {
                    cell.gorkov_u = kNaN;
                }
            }
            raster.push_back(cell);
        }
    }
    return raster;
}

json load_config_document(const CommonOptions& options) {
    json doc = json::object();
    if (options.config_path) {
        std::ifstream in(*options.config_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open config " + *options.config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("malformed JSON: ") + e.what());
        }
    }
    if (options.seed) {
        if (!doc.is_object()) throw ConfigError("", "expected a JSON object at the top level");
        doc["seed"] = *options.seed;
    }
    return doc;
}

int cmd_field(const CommonOptions& options, const SliceSpec& slice, std::ostream& log) {
    const Loaded l = load(options);
    const transport::Scenario scenario = resolve_scenario(l.config, l.config_dir);
    const auto raster = field_raster(field_setup(scenario, l.config.kind), scenario, slice);
    std::string path;
    if (options.format == OutputFormat::csv) {
        path = join(l.out_dir, "field.csv");
        write_file(path, to_text([&](std::ostream& o) { write_raster_csv(o, raster); }));
    } else {
        path = join(l.out_dir, "field.json");
        write_file(path, raster_json(raster).dump(2) + "\n");
    }
    fmt::print(log, "field: {} cells -> {}\n", raster.size(), path);
    return 0;
}

int cmd_calibrate(const CommonOptions& options, std::ostream& log) {
    const Loaded l = load(options);
    const auto& s = l.config.scenario;
    const auto cal = transport::calibrate_amplitude(s.array, s.medium);
    const double joint = transport::face_to_face_focal_pressure(
        s.array, s.medium, field::AmplitudeModel::calibrated(cal.reference_amplitude));
    const json report{{"reference_amplitude", cal.reference_amplitude},
                      {"unit_aggregate", cal.unit_aggregate},
                      {"target_pressure", cal.target_pressure},
                      {"achieved_pressure", cal.achieved_pressure},
                      {"face_to_face_pressure", joint},
                      {"face_to_face_reference", kFaceToFaceReference},
                      {"face_to_face_deviation", joint / kFaceToFaceReference - 1.0},
                      {"pressure_ratio", joint / cal.achieved_pressure},
                      {"config_digest", sha256_hex(l.canonical)},
                      {"version", kVersion}};
    const std::string path = join(l.out_dir, "calibration.json");
    write_file(path, report.dump(2) + "\n");
    fmt::print(log,
               "calibrate: A = {:.6g} Pa*m (X = {:.6g} 1/m); single-sided {:.1f} Pa; face-to-face {:.1f} Pa "
               "({:+.1f}% vs {:.1f} Pa) -> {}\n",
               cal.reference_amplitude, cal.unit_aggregate, cal.achieved_pressure, joint,
               100.0 * (joint / kFaceToFaceReference - 1.0), kFaceToFaceReference, path);
    return 0;
}

int cmd_sync(const CommonOptions& options, std::ostream& log) {
    const Loaded l = load(options);
    if (!l.config.seed) throw ConfigError("seed", "required when the clock model is stochastic");
    const transport::Scenario s = resolve_scenario(l.config, l.config_dir);
    const auto trace = simulate_clock(s);
    write_sync_outputs(trace, s.medium, l.out_dir, options.format);
    const auto summary = clock::summarize(trace, s.medium);
    fmt::print(log, "sync: {} events, mean |dt| at sync {:.4g} s, p95 {:.4g} s -> {}\n", trace.sync_count(),
               summary.at_sync.mean_abs, summary.at_sync.p95_abs, l.out_dir);
    return 0;
}

int cmd_run(const CommonOptions& options, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    const Loaded l = load(options);
    if (l.config.kind == RunKind::sync) return cmd_sync(options, log);

    const transport::Scenario s = resolve_scenario(l.config, l.config_dir);
    const auto result = transport::run_scenario(s);

    if (options.format == OutputFormat::csv) {
        write_file(join(l.out_dir, "trace.csv"), to_text([&](std::ostream& o) { write_trace_csv(o, result.trace); }));
    } else {
        write_file(join(l.out_dir, "trace.json"), trace_json(result.trace).dump(2) + "\n");
    }
    if (result.sync) write_sync_outputs(*result.sync, s.medium, l.out_dir, options.format);
    write_file(join(l.out_dir, "metrics.json"), metrics_json(result.metrics).dump(2) + "\n");

    RunSummary summary;
    summary.metrics = result.metrics;
    summary.config_digest = sha256_hex(l.canonical);
    summary.version = kVersion;
    summary.warnings = result.warnings;
    summary.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(join(l.out_dir, "summary.json"), summary_json(summary).dump(2) + "\n");

    for (const auto& w : result.warnings) fmt::print(std::cerr, "warning: {}\n", w);
    const auto& m = result.metrics;
    fmt::print(log, "run: {} {}; oscillation ({:.3g}, {:.3g}, {:.3g}) m; mean lag {:.3g} m -> {}\n",
               to_string(l.config.kind), m.retained ? "retained" : "dropped", m.oscillation_amplitude.x(),
               m.oscillation_amplitude.y(), m.oscillation_amplitude.z(), m.mean_lag, l.out_dir);
    return m.retained ? 0 : 2;
}

int cmd_sweep(const CommonOptions& options, const SweepSpec& sweep, std::ostream& log) {
    if (sweep.param.empty()) throw ConfigError("--param", "required");
    if (sweep.values.empty()) throw ConfigError("--values", "required");
    if (sweep.replicates < 1) throw ConfigError("--replicates", "expected a positive integer");

    const json base_doc = load_config_document(options);
    const Loaded l = load(options);
    const std::uint64_t base_seed = l.config.seed.value_or(0);

    std::ostringstream out;
    out << "param,value,replicate,seed,retained,osc_x,osc_y,osc_z,mean_lag,transport_time,node_shift_p95,"
           "sync_mean_abs_s,sync_p95_abs_s\n";
    for (const auto& text : sweep.values) {
        json value;
        try {
            value = json::parse(text);
        } catch (const json::parse_error&) {
            value = text;
        }
        for (int r = 0; r < sweep.replicates; ++r) {
            json doc = base_doc;
            set_json_path(doc, sweep.param, value);
            const std::uint64_t seed = r == 0 ? base_seed : derive_seed(base_seed, static_cast<std::uint64_t>(r));
            if (l.config.seed || r > 0) doc["seed"] = seed;
            const ScenarioConfig config = parse_config_document(doc);
            const transport::Scenario s = resolve_scenario(config, l.config_dir);

            std::string retained;
            transport::TransportMetrics m;
            m.mean_lag = kNaN;
            m.transport_time = kNaN;
            m.oscillation_amplitude = Vec3::Constant(kNaN);
            double node_p95 = 0.0;
            double mean_abs = kNaN;
            double p95_abs = kNaN;
            std::optional<clock::SyncTrace> trace;
            if (config.kind == RunKind::sync) {
                trace = simulate_clock(s);
            } else {
                const auto result = transport::run_scenario(s);
                m = result.metrics;
                retained = m.retained ? "true" : "false";
                trace = result.sync;
            }
            if (trace) {
                const auto summary = clock::summarize(*trace, s.medium);
                node_p95 = summary.node_shift_p95;
                mean_abs = summary.at_sync.mean_abs;
                p95_abs = summary.at_sync.p95_abs;
            }
            fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", sweep.param, value.dump(), r, seed, retained,
                       m.oscillation_amplitude.x(), m.oscillation_amplitude.y(), m.oscillation_amplitude.z(),
                       m.mean_lag, m.transport_time, node_p95, mean_abs, p95_abs);
        }
    }
    const std::string path = join(l.out_dir, "sweep.csv");
    write_file(path, out.str());
    fmt::print(log, "sweep: {} values x {} replicates -> {}\n", sweep.values.size(), sweep.replicates, path);
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Acoustic levitation transport simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonOptions options;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string format = "csv";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Scenario config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides seed)");
        sub->add_option("--format", format, "Trace/raster format")->check(CLI::IsMember({"csv", "json"}));
    };

    SliceSpec slice;
    std::string center;
    auto* field_cmd = app.add_subcommand("field", "Write a pressure / Gor'kov raster on a plane");
    add_common(field_cmd);
    field_cmd->add_option("--plane", slice.plane, "Slice plane")->check(CLI::IsMember({"xy", "xz", "yz"}));
    field_cmd->add_option("--center", center, "Slice center x,y,z in m");
    field_cmd->add_option("--extent", slice.extent, "Slice width in m")->check(CLI::NonNegativeNumber);
    field_cmd->add_option("--resolution", slice.resolution, "Points per side")->check(CLI::PositiveNumber);

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Solve the amplitude constant and write calibration.json");
    add_common(calibrate_cmd);
    auto* run_cmd = app.add_subcommand("run", "Run the configured scenario (exit 0 retained, 2 dropped)");
    add_common(run_cmd);
    auto* sync_cmd = app.add_subcommand("sync", "Simulate clock synchronization only");
    add_common(sync_cmd);

    SweepSpec sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a scenario over parameter values and seeds");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", sweep.param, "Dotted config key, e.g. clock.detection_jitter")->required();
    sweep_cmd->add_option("--values", sweep.values, "Comma-separated JSON values")->delimiter(',')->required();
    sweep_cmd->add_option("--replicates", sweep.replicates, "Seeds per value")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        auto* sub = app.get_subcommands().front();
        if (sub->count("--config")) options.config_path = config_path;
        if (sub->count("--out")) options.out_dir = out_dir;
        if (sub->count("--seed")) options.seed = seed;
        options.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
        if (sub == field_cmd) {
            if (!center.empty()) slice.center = parse_center(center);
            return cmd_field(options, slice, std::cout);
        }
        if (sub == calibrate_cmd) return cmd_calibrate(options, std::cout);
        if (sub == run_cmd) return cmd_run(options, std::cout);
        if (sub == sync_cmd) return cmd_sync(options, std::cout);
        return cmd_sweep(options, sweep, std::cout);
    } catch (const ConfigError& e) {
        fmt::print(std::cerr, "config error: {}\n", e.what());
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
    }
    return 1;
}

}  // namespace sonotrans::cli
