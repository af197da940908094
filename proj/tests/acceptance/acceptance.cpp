// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "sonotrans/cli/config.hpp"
#include "sonotrans/clock_sync.hpp"
#include "sonotrans/drive_control.hpp"
#include "sonotrans/formation.hpp"
#include "sonotrans/gorkov.hpp"
#include "sonotrans/standing_wave.hpp"
#include "sonotrans/transport.hpp"

#include <fmt/core.h>

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sonotrans;

namespace {

// Tolerances and budgets.
constexpr double kReferenceFaceToFace = 7106.3;   // Pa
constexpr double kReferenceSingleSided = 4469.9;  // Pa
constexpr double kRatioTarget = 1.59;
constexpr double kRatioBand = 0.40;
constexpr double kNodeSpacingTol = 1e-6;     // m
constexpr double kForceRelTol = 1e-3;
constexpr double kPhaseInvarianceTol = 1e-9;
constexpr double kWifiMeanLo = 5.3e-3;       // s
constexpr double kWifiMeanHi = 10.3e-3;      // s
constexpr double kIrP95Max = 2.0e-6;         // s
constexpr std::size_t kSyncEvents = 10000;
constexpr double kChainRelTol = 1e-4;
constexpr double kKinematicsTol = 1e-12;
constexpr double kGapTol = 1e-3;             // m

// Independent high-precision oracles.
constexpr double kPhaseAt1p6us = 0.4021238596594935345;
constexpr double kNodeShiftAt1p6us = 2.744e-4;
constexpr double kLiteralForceEighthWave = -183183245.1072765736712911593748981;
constexpr double kStandardForceEighthWave = 1.282793824370195801492617813982254e-5;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    fmt::print("[{}] criterion {}: {} | {} | {:.2f} s (budget {:.0f} s){}\n", pass ? "PASS" : "FAIL", id, name,
               out.detail, elapsed, budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

transport::Scenario load(const std::string& name) {
    const auto config = cli::parse_config(slurp(std::string(SONOTRANS_CONFIGS) + "/" + name));
    return cli::resolve_scenario(config, SONOTRANS_CONFIGS);
}

// Zero of the standing-wave pressure bracketed by [lo, hi], by bisection.
double node_between(double lo, double hi, const MediumParams& m, double dphi = 0.0) {
    auto env = [&](double x) { return field::standing_wave_pressure(x, 0.0, 1000.0, m, dphi); };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((env(lo) > 0) == (env(mid) > 0)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome calibrated_face_to_face() {
    const MediumParams m;
    const transport::ArrayConfig ac;
    const auto cal = transport::calibrate_amplitude(ac, m, kReferenceSingleSided);
    const double joint =
        transport::face_to_face_focal_pressure(ac, m, field::AmplitudeModel::calibrated(cal.reference_amplitude));
    const double ratio = joint / cal.achieved_pressure;
    const double deviation = joint / kReferenceFaceToFace - 1.0;
    const bool pass = std::abs(deviation) <= 0.25 && std::abs(ratio - kRatioTarget) <= kRatioBand;
    return {pass, fmt::format("A = {:.6f} Pa*m, single {:.1f} Pa, joint {:.1f} Pa ({:+.1f}% vs {}), ratio {:.3f}",
                              cal.reference_amplitude, cal.achieved_pressure, joint, 100.0 * deviation,
                              kReferenceFaceToFace, ratio)};
}

Outcome node_spacing() {
    const MediumParams m;
    const double lam = m.wavelength();
    double worst = 0.0;
    double previous = node_between(0.0, lam / 2, m);
    for (int n = 1; n <= 20; ++n) {
        const double next = node_between(previous + lam / 4, previous + 3 * lam / 4, m);
        worst = std::max(worst, std::abs((next - previous) - 0.0042875));
        previous = next;
    }
    return {worst < kNodeSpacingTol, fmt::format("max |spacing - 4.2875 mm| = {:.3e} m over 20 gaps", worst)};
}

Outcome force_consistency() {
    const MediumParams m;
    const double lam = m.wavelength();
    const field::PlaneStandingWave wave(1000.0, m);
    const ParticleState bead;
    const double literal =
        field::radiation_force(wave, Vec3(lam / 8, 0, 0), field::GorkovMode::paper_literal, bead).x();
    const double standard = field::radiation_force(wave, Vec3(lam / 8, 0, 0), field::GorkovMode::standard, bead).x();
    const double err_literal = std::abs(literal / kLiteralForceEighthWave - 1.0);
    const double err_standard = std::abs(standard / kStandardForceEighthWave - 1.0);

    auto a = field::build_array(8, 8, 0.0103);
    a = field::focus_phases(a, Vec3(0, 0, 0.05), field::twin_trap_signature(a), m);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-0.04, 0.04);
    double worst_phase = 0.0;
    for (double offset : {0.1, 1.0, 2.5, kPi, 4.4, 6.2}) {
        const std::array<field::PhasedArray, 1> base{a};
        const std::array<field::PhasedArray, 1> shifted{field::with_phase_offset(a, offset)};
        for (int i = 0; i < 200; ++i) {
            const Vec3 p(u(rng), u(rng), 0.05 + u(rng));
            const auto model = field::AmplitudeModel::calibrated(4.142326149054925);
            const double p0 = std::abs(field::complex_pressure(base, p, model, m));
            const double p1 = std::abs(field::complex_pressure(shifted, p, model, m));
            worst_phase = std::max(worst_phase, std::abs(p1 - p0) / p0);
        }
    }
    const bool pass = err_literal < kForceRelTol && err_standard < kForceRelTol && worst_phase < kPhaseInvarianceTol;
    return {pass, fmt::format("force rel. error literal {:.2e}, standard {:.2e}; |P| phase invariance {:.1e}",
                              err_literal, err_standard, worst_phase)};
}

Outcome clock_sync() {
    const MediumParams m;
    const auto wifi = load("sync_wifi.json");
    const auto ir = load("sync_ir.json");
    const auto run = [&](const transport::Scenario& s) {
        const double duration = s.clock.protocol.period * static_cast<double>(kSyncEvents);
        return clock::summarize(
            clock::simulate_sync(s.clock.leader, s.clock.follower, s.clock.protocol, duration, s.clock.sample_interval),
            m);
    };
    const auto w = run(wifi);
    const auto p = run(ir);
    const bool pass = w.at_sync.count == kSyncEvents && p.at_sync.count == kSyncEvents &&
                      w.at_sync.mean_abs >= kWifiMeanLo && w.at_sync.mean_abs <= kWifiMeanHi &&
                      p.at_sync.p95_abs <= kIrP95Max;
    return {pass, fmt::format("message mean |dt| {:.3f} ms (window [5.3, 10.3]); pulse p95 |dt| {:.3f} us (<= 2.0); "
                              "{} events each",
                              1e3 * w.at_sync.mean_abs, 1e6 * p.at_sync.p95_abs, w.at_sync.count)};
}

Outcome phase_chain() {
    const MediumParams m;
    const double phase = clock::offset_to_phase_error(1.6e-6, 40000.0);
    const double shift = clock::phase_error_to_node_shift(phase, m);
    // Node scan of the shifted standing wave.
    const double lam = m.wavelength();
    const double scanned = lam / 4 - node_between(lam / 8, 3 * lam / 8, m, phase);
    const double e_phase = std::abs(phase / kPhaseAt1p6us - 1.0);
    const double e_shift = std::abs(shift / kNodeShiftAt1p6us - 1.0);
    const double e_scan = std::abs(scanned / kNodeShiftAt1p6us - 1.0);
    const bool pass = e_phase < kChainRelTol && e_shift < kChainRelTol && e_scan < kChainRelTol;
    return {pass, fmt::format("phase {:.6f} rad (rel {:.1e}), shift {:.4e} m (rel {:.1e}), scan {:.4e} m (rel {:.1e})",
                              phase, e_phase, shift, e_shift, scanned, e_scan)};
}

std::string metrics_text(const transport::TransportMetrics& t) {
    return fmt::format("retained={}, oscillation ({:.3f}, {:.3f}, {:.3f}) mm", t.retained,
                       1e3 * t.oscillation_amplitude.x(), 1e3 * t.oscillation_amplitude.y(),
                       1e3 * t.oscillation_amplitude.z());
}

Outcome cooperative(const std::string& config, bool expect_retained) {
    const auto s = load(config);
    const auto r = transport::run_cooperative(s);
    std::string sync;
    if (r.sync) {
        const auto summary = clock::summarize(*r.sync, s.medium);
        sync = fmt::format(", p95 node shift {:.3f} mm", 1e3 * summary.node_shift_p95);
    }
    return {r.metrics.retained == expect_retained, metrics_text(r.metrics) + sync};
}

Outcome independent() {
    const auto s = load("independent.json");
    const auto r = transport::run_independent(s);
    const double limit = s.medium.wavelength() / 4.0;
    const bool pass = r.metrics.retained && r.metrics.oscillation_amplitude.maxCoeff() < limit;
    return {pass, metrics_text(r.metrics) + fmt::format(", limit {:.3f} mm per axis", 1e3 * limit)};
}

Outcome control_suite() {
    const drive::RobotParams robot;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uv(-0.3, 0.3), uw(-6.0, 6.0);
    double worst_kin = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double v = uv(rng);
        const double w = uw(rng);
        const auto t = drive::forward_kinematics(drive::inverse_kinematics_unclamped(v, w, robot), robot);
        worst_kin = std::max({worst_kin, std::abs(t.linear - v), std::abs(t.angular - w)});
    }

    const drive::TwoLayerGains gains;
    std::uniform_real_distribution<double> ux(0.0, 1.5), uy(0.0, 3.0), uth(-kPi, kPi);
    int reached = 0;
    double slowest = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        drive::RobotPose pose{ux(rng), uy(rng), uth(rng)};
        const drive::RobotPose goal{ux(rng), uy(rng), uth(rng)};
        const double dt = 0.01;
        for (int step = 0; step < 30000; ++step) {
            if (std::hypot(goal.x - pose.x, goal.y - pose.y) < gains.goal_tolerance &&
                std::abs(wrap_angle(goal.theta - pose.theta)) < gains.heading_tolerance) {
                ++reached;
                slowest = std::max(slowest, step * dt);
                break;
            }
            const auto tw = drive::forward_kinematics(drive::go_to_pose(pose, goal, gains, robot), robot);
            pose = drive::integrate_pose(pose, tw.linear, tw.angular, dt);
        }
    }

    formation::FormationParams fp;
    formation::FormationController controller(fp, {0.0, 0.05, 0.0});
    auto state = controller.initial_state(0.02);
    const double dt = 1e-3;
    for (int i = 0; i < 60000; ++i) state = controller.step(state, i * dt, dt);
    const double gap_error = std::abs(controller.gap(state) - fp.desired_gap);

    const bool pass = worst_kin <= kKinematicsTol && reached == 100 && gap_error < kGapTol;
    return {pass, fmt::format("kinematics round trip {:.1e}; go_to_pose {}/100 (slowest {:.1f} s); "
                              "PID gap error after 60 s {:.2e} m",
                              worst_kin, reached, slowest, gap_error)};
}

}  // namespace

int main() {
    report(1, "calibrated face-to-face focal pressure", 5.0, calibrated_face_to_face);
    report(2, "standing-wave node spacing", 1.0, node_spacing);
    report(3, "force-potential consistency", 1.0, force_consistency);
    report(4, "clock synchronization accuracy", 10.0, clock_sync);
    report(5, "offset -> phase -> node shift chain", 1.0, phase_chain);
    report(6, "cooperative transport, IR-class sync retains", 60.0, [] { return cooperative("cooperative_ir.json", true); });
    report(6, "cooperative transport, Wi-Fi-class sync drops", 60.0,
           [] { return cooperative("cooperative_wifi.json", false); });
    report(7, "independent transport at 5 cm/s", 60.0, independent);
    report(8, "control suite", 30.0, control_suite);
    fmt::print("{}\n", failures == 0 ? "acceptance: all criteria passed" : fmt::format("acceptance: {} failed", failures));
    return failures == 0 ? 0 : 1;
}
