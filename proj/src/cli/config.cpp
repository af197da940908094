#include "sonotrans/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sonotrans::cli {

using nlohmann::json;

namespace {

enum class Bound { any, positive, nonnegative };

std::string describe(const json& v) {
    std::string s = v.dump();
    if (s.size() > 40) s = s.substr(0, 37) + "...";
    return s;
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected object, got " + describe(j_));
    }

    [[nodiscard]] std::string key(std::string_view k) const {
        return path_.empty() ? std::string(k) : path_ + "." + std::string(k);
    }

    const json* find(std::string_view k) {
        auto it = j_.find(k);
        if (it == j_.end()) return nullptr;
        seen_.insert(std::string(k));
        return &*it;
    }

    double number(std::string_view k, double def, Bound bound = Bound::any) {
        const json* v = find(k);
        if (!v) return def;
        return check_number(*v, key(k), bound);
    }

    std::optional<double> optional_number(std::string_view k, std::optional<double> def, Bound bound) {
        const json* v = find(k);
        if (!v) return def;
        if (v->is_null()) return std::nullopt;
        return check_number(*v, key(k), bound);
    }

    int integer(std::string_view k, int def, int min_value) {
        const json* v = find(k);
        if (!v) return def;
        if (!v->is_number_integer()) throw ConfigError(key(k), "expected integer, got " + describe(*v));
        const auto n = v->get<long long>();
        if (n < min_value || n > std::numeric_limits<int>::max()) {
            throw ConfigError(key(k), "expected integer >= " + std::to_string(min_value) + ", got " + describe(*v));
        }
        return static_cast<int>(n);
    }

    bool boolean(std::string_view k, bool def) {
        const json* v = find(k);
        if (!v) return def;
        if (!v->is_boolean()) throw ConfigError(key(k), "expected boolean, got " + describe(*v));
        return v->get<bool>();
    }

    std::string choice(std::string_view k, const std::string& def, std::initializer_list<std::string_view> allowed) {
        const json* v = find(k);
        if (!v) return def;
        std::string options;
        for (auto a : allowed) options += (options.empty() ? "" : "|") + std::string(a);
        if (!v->is_string()) throw ConfigError(key(k), "expected one of " + options + ", got " + describe(*v));
        const auto s = v->get<std::string>();
        for (auto a : allowed) {
            if (s == a) return s;
        }
        throw ConfigError(key(k), "expected one of " + options + ", got " + describe(*v));
    }

    std::optional<std::string> optional_string(std::string_view k) {
        const json* v = find(k);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_string()) throw ConfigError(key(k), "expected string, got " + describe(*v));
        return v->get<std::string>();
    }

    Reader object(std::string_view k) {
        static const json empty = json::object();
        const json* v = find(k);
        return Reader(v ? *v : empty, key(k));
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ConfigError(key(item.key()), "unknown key");
        }
    }

private:
    static double check_number(const json& v, const std::string& k, Bound bound) {
        if (!v.is_number()) throw ConfigError(k, "expected number, got " + describe(v));
        const double x = v.get<double>();
        if (bound == Bound::positive && !(x > 0.0)) throw ConfigError(k, "expected positive number, got " + describe(v));
        if (bound == Bound::nonnegative && !(x >= 0.0)) {
            throw ConfigError(k, "expected non-negative number, got " + describe(v));
        }
        return x;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ScenarioConfig default_config() {
    ScenarioConfig c;
    c.scenario.clock.follower.skew_ppm = 10.0;
    return c;
}

clock::OscillatorModel read_oscillator(Reader r, clock::OscillatorModel o) {
    o.nominal_frequency = r.number("nominal_frequency", o.nominal_frequency, Bound::positive);
    o.skew_ppm = r.number("skew_ppm", o.skew_ppm);
    if (!(std::abs(o.skew_ppm) < 1000.0)) throw ConfigError(r.key("skew_ppm"), "expected |skew_ppm| < 1000");
    o.jitter_sigma = r.number("jitter_sigma", o.jitter_sigma, Bound::nonnegative);
    o.initial_offset = r.number("initial_offset", o.initial_offset);
    r.finish();
    return o;
}

json oscillator_json(const clock::OscillatorModel& o) {
    return {{"nominal_frequency", o.nominal_frequency},
            {"skew_ppm", o.skew_ppm},
            {"jitter_sigma", o.jitter_sigma},
            {"initial_offset", o.initial_offset}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string_view to_string(field::GorkovMode m) {
    return m == field::GorkovMode::standard ? "standard" : "paper_literal";
}

std::string_view to_string(transport::DragModel m) {
    return m == transport::DragModel::stokes ? "stokes" : "schiller_naumann";
}

}  // namespace

std::string_view to_string(RunKind kind) {
    switch (kind) {
        case RunKind::independent: return "independent";
        case RunKind::cooperative: return "cooperative";
        case RunKind::sync: return "sync";
    }
    return "independent";
}

bool ScenarioConfig::stochastic() const {
    return kind == RunKind::sync || (kind == RunKind::cooperative && !scenario.clock.ideal);
}

ScenarioConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_config_document(doc);
}

ScenarioConfig parse_config_document(const json& doc) {
    ScenarioConfig c = default_config();
    transport::Scenario& s = c.scenario;
    Reader root(doc, "");

    const auto kind = root.choice("kind", "independent", {"independent", "cooperative", "sync"});
    c.kind = kind == "cooperative" ? RunKind::cooperative : kind == "sync" ? RunKind::sync : RunKind::independent;
    s.kind = c.kind == RunKind::cooperative ? transport::ScenarioKind::cooperative : transport::ScenarioKind::independent;

    if (const json* seed = root.find("seed"); seed && !seed->is_null()) {
        if (!seed->is_number_unsigned()) throw ConfigError("seed", "expected non-negative integer, got " + describe(*seed));
        c.seed = seed->get<std::uint64_t>();
    }
    if (auto dir = root.optional_string("output_dir")) c.output_dir = *dir;
    c.calibration_file = root.optional_string("calibration_file");

    {
        auto r = root.object("medium");
        s.medium.speed_of_sound = r.number("speed_of_sound", s.medium.speed_of_sound, Bound::positive);
        s.medium.density = r.number("density", s.medium.density, Bound::positive);
        s.medium.frequency = r.number("frequency", s.medium.frequency, Bound::positive);
        r.finish();
    }
    {
        auto r = root.object("array");
        auto& a = s.array;
        a.rows = r.integer("rows", a.rows, 1);
        a.cols = r.integer("cols", a.cols, 1);
        a.pitch = r.number("pitch", a.pitch, Bound::positive);
        a.focal_distance = r.number("focal_distance", a.focal_distance, Bound::positive);
        a.separation = r.number("separation", a.separation, Bound::positive);
        a.mount_height = r.number("mount_height", a.mount_height, Bound::nonnegative);
        a.twin_trap = r.boolean("twin_trap", a.twin_trap);
        auto amp = r.object("amplitude");
        c.unit_amplitude = amp.choice("model", "calibrated_monopole", {"unit", "calibrated_monopole"}) == "unit";
        c.reference_amplitude = amp.optional_number("reference_amplitude", std::nullopt, Bound::positive);
        amp.finish();
        r.finish();
    }
    {
        auto r = root.object("robot");
        auto& p = s.robot;
        p.wheel_radius = r.number("wheel_radius", p.wheel_radius, Bound::positive);
        p.wheel_base = r.number("wheel_base", p.wheel_base, Bound::positive);
        p.max_wheel_speed = r.number("max_wheel_speed", p.max_wheel_speed, Bound::positive);
        p.min_effective_speed = r.number("min_effective_speed", p.min_effective_speed, Bound::nonnegative);
        r.finish();
    }
    {
        auto r = root.object("steering");
        auto& g = s.steering;
        g.k_pos = r.number("k_pos", g.k_pos, Bound::positive);
        g.k_orient = r.number("k_orient", g.k_orient, Bound::positive);
        g.goal_tolerance = r.number("goal_tolerance", g.goal_tolerance, Bound::positive);
        g.heading_tolerance = r.number("heading_tolerance", g.heading_tolerance, Bound::positive);
        const auto cap = r.optional_number("max_speed", std::nullopt, Bound::positive);
        g.max_speed = cap ? *cap : std::numeric_limits<double>::infinity();
        r.finish();
    }
    {
        auto r = root.object("pid");
        auto& g = s.pid;
        g.kp = r.number("kp", g.kp, Bound::nonnegative);
        g.ki = r.number("ki", g.ki, Bound::nonnegative);
        g.kd = r.number("kd", g.kd, Bound::nonnegative);
        g.integral_limit = r.number("integral_limit", g.integral_limit, Bound::positive);
        g.output_limit = r.number("output_limit", g.output_limit, Bound::positive);
        r.finish();
    }
    {
        auto r = root.object("formation");
        s.desired_gap = r.number("desired_gap", s.desired_gap, Bound::positive);
        s.collision_gap = r.number("collision_gap", s.collision_gap, Bound::positive);
        s.message_delay = r.number("message_delay", s.message_delay, Bound::nonnegative);
        if (!(s.collision_gap < s.desired_gap)) {
            throw ConfigError(r.key("collision_gap"), "must be smaller than formation.desired_gap");
        }
        r.finish();
    }
    {
        auto r = root.object("particle");
        auto& p = s.particle;
        p.radius = r.number("radius", p.radius, Bound::positive);
        p.density = r.number("density", p.density, Bound::positive);
        p.sound_speed = r.number("sound_speed", p.sound_speed, Bound::positive);
        r.finish();
    }

    s.velocity = root.number("velocity", s.velocity, Bound::positive);
    s.heading = root.number("heading", s.heading);
    s.duration = root.number("duration", s.duration, Bound::positive);
    s.dt = root.number("dt", s.dt, Bound::positive);
    if (s.dt > transport::kMaxParticleStep) throw ConfigError("dt", "expected dt <= 0.001 s, got " + std::to_string(s.dt));

    if (const json* w = root.find("waypoints")) {
        if (!w->is_array() || w->empty()) throw ConfigError("waypoints", "expected non-empty array of [x, y] pairs");
        s.waypoints.clear();
        for (std::size_t i = 0; i < w->size(); ++i) {
            const json& p = (*w)[i];
            const std::string k = "waypoints[" + std::to_string(i) + "]";
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ConfigError(k, "expected [x, y], got " + describe(p));
            }
            s.waypoints.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }

    {
        auto r = root.object("clock");
        auto& ck = s.clock;
        ck.ideal = r.boolean("ideal", ck.ideal);
        const auto kind_name = r.choice("protocol", "pulse_based", {"pulse_based", "message_based"});
        ck.protocol = kind_name == "message_based" ? clock::SyncProtocol::wifi_message() : clock::SyncProtocol::ir_pulse();
        auto& p = ck.protocol;
        p.period = r.number("period", p.period, Bound::positive);
        p.latency_mean = r.number("latency_mean", p.latency_mean, Bound::nonnegative);
        p.latency_sigma = r.number("latency_sigma", p.latency_sigma, Bound::nonnegative);
        p.detection_jitter = r.number("detection_jitter", p.detection_jitter, Bound::nonnegative);
        ck.sample_interval = r.number("sample_interval", ck.sample_interval, Bound::nonnegative);
        ck.leader = read_oscillator(r.object("leader"), ck.leader);
        ck.follower = read_oscillator(r.object("follower"), ck.follower);
        r.finish();
    }

    s.gorkov_mode = root.choice("gorkov_mode", "standard", {"standard", "paper_literal"}) == "standard"
                        ? field::GorkovMode::standard
                        : field::GorkovMode::paper_literal;
    s.capture_radius = root.number("capture_radius", s.capture_radius, Bound::nonnegative);

    {
        auto r = root.object("environment");
        auto& e = s.environment;
        e.gravity = r.number("gravity", e.gravity, Bound::nonnegative);
        e.viscosity = r.number("viscosity", e.viscosity, Bound::positive);
        e.air_density = r.number("air_density", e.air_density, Bound::positive);
        e.drag = r.boolean("drag", e.drag);
        e.drag_model = r.choice("drag_model", "schiller_naumann", {"stokes", "schiller_naumann"}) == "stokes"
                           ? transport::DragModel::stokes
                           : transport::DragModel::schiller_naumann;
        r.finish();
    }
    root.finish();

    if (c.stochastic() && !c.seed) throw ConfigError("seed", "required when the clock model is stochastic");
    return c;
}

json to_json(const ScenarioConfig& c) {
    const transport::Scenario& s = c.scenario;
    json waypoints = json::array();
    for (const auto& w : s.waypoints) waypoints.push_back({w[0], w[1]});
    const auto& p = s.clock.protocol;
    return json{
        {"kind", to_string(c.kind)},
        {"seed", c.seed ? json(*c.seed) : json(nullptr)},
        {"output_dir", c.output_dir},
        {"calibration_file", c.calibration_file ? json(*c.calibration_file) : json(nullptr)},
        {"medium",
         {{"speed_of_sound", s.medium.speed_of_sound}, {"density", s.medium.density}, {"frequency", s.medium.frequency}}},
        {"array",
         {{"rows", s.array.rows},
          {"cols", s.array.cols},
          {"pitch", s.array.pitch},
          {"focal_distance", s.array.focal_distance},
          {"separation", s.array.separation},
          {"mount_height", s.array.mount_height},
          {"twin_trap", s.array.twin_trap},
          {"amplitude",
           {{"model", c.unit_amplitude ? "unit" : "calibrated_monopole"},
            {"reference_amplitude", optional_json(c.reference_amplitude)}}}}},
        {"robot",
         {{"wheel_radius", s.robot.wheel_radius},
          {"wheel_base", s.robot.wheel_base},
          {"max_wheel_speed", s.robot.max_wheel_speed},
          {"min_effective_speed", s.robot.min_effective_speed}}},
        {"steering",
         {{"k_pos", s.steering.k_pos},
          {"k_orient", s.steering.k_orient},
          {"goal_tolerance", s.steering.goal_tolerance},
          {"heading_tolerance", s.steering.heading_tolerance},
          {"max_speed", std::isfinite(s.steering.max_speed) ? json(s.steering.max_speed) : json(nullptr)}}},
        {"pid",
         {{"kp", s.pid.kp},
          {"ki", s.pid.ki},
          {"kd", s.pid.kd},
          {"integral_limit", s.pid.integral_limit},
          {"output_limit", s.pid.output_limit}}},
        {"formation",
         {{"desired_gap", s.desired_gap}, {"collision_gap", s.collision_gap}, {"message_delay", s.message_delay}}},
        {"particle",
         {{"radius", s.particle.radius}, {"density", s.particle.density}, {"sound_speed", s.particle.sound_speed}}},
        {"velocity", s.velocity},
        {"heading", s.heading},
        {"duration", s.duration},
        {"dt", s.dt},
        {"waypoints", waypoints},
        {"clock",
         {{"ideal", s.clock.ideal},
          {"protocol", clock::to_string(p.kind)},
          {"period", p.period},
          {"latency_mean", p.latency_mean},
          {"latency_sigma", p.latency_sigma},
          {"detection_jitter", p.detection_jitter},
          {"sample_interval", s.clock.sample_interval},
          {"leader", oscillator_json(s.clock.leader)},
          {"follower", oscillator_json(s.clock.follower)}}},
        {"gorkov_mode", to_string(s.gorkov_mode)},
        {"capture_radius", s.capture_radius},
        {"environment",
         {{"gravity", s.environment.gravity},
          {"viscosity", s.environment.viscosity},
          {"air_density", s.environment.air_density},
          {"drag", s.environment.drag},
          {"drag_model", to_string(s.environment.drag_model)}}},
    };
}

std::string serialize_config(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

void set_json_path(json& doc, std::string_view path, const json& value) {
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (part.empty()) throw ConfigError(std::string(path), "empty path component");
        if (!node->is_object()) throw ConfigError(std::string(path), "path crosses a non-object value");
        if (dot == std::string_view::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

transport::Scenario resolve_scenario(const ScenarioConfig& config, const std::string& calibration_dir) {
    transport::Scenario s = config.scenario;
    const std::uint64_t seed = config.seed.value_or(0);
    s.clock.leader.rng_seed = seed;
    s.clock.follower.rng_seed = seed;

    if (config.unit_amplitude) {
        s.array.amplitude = field::AmplitudeModel::unit();
    } else if (config.reference_amplitude) {
        s.array.amplitude = field::AmplitudeModel::calibrated(*config.reference_amplitude);
    } else if (config.calibration_file) {
        std::string path = *config.calibration_file;
        if (!path.empty() && path.front() != '/') path = calibration_dir + "/" + path;
        std::ifstream in(path);
        if (!in) throw ConfigError("calibration_file", "cannot open " + path);
        json cal;
        try {
            cal = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("calibration_file", std::string("malformed calibration file: ") + e.what());
        }
        if (!cal.contains("reference_amplitude") || !cal["reference_amplitude"].is_number() ||
            !(cal["reference_amplitude"].get<double>() > 0.0)) {
            throw ConfigError("calibration_file", path + " lacks a positive reference_amplitude");
        }
        s.array.amplitude = field::AmplitudeModel::calibrated(cal["reference_amplitude"].get<double>());
    } else {
        s.array.amplitude =
            field::AmplitudeModel::calibrated(transport::calibrate_amplitude(s.array, s.medium).reference_amplitude);
    }
    return s;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace sonotrans::cli
