#pragma once

#include "sonotrans/array_field.hpp"
#include "sonotrans/clock_sync.hpp"
#include "sonotrans/drive_control.hpp"
#include "sonotrans/formation.hpp"
#include "sonotrans/gorkov.hpp"
#include "sonotrans/particle.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sonotrans::transport {

enum class DragModel {
    stokes,            ///< -6 pi mu R v
    schiller_naumann,  ///< Stokes scaled by 1 + 0.15 Re^0.687
};

struct Environment {
    double gravity = 9.81;         ///< m/s^2, along -z
    double viscosity = 1.81e-5;    ///< Pa*s, air
    double air_density = 1.2;      ///< kg/m^3, used for the Reynolds number
    bool drag = true;
    DragModel drag_model = DragModel::schiller_naumann;

    bool operator==(const Environment&) const = default;
};

inline constexpr double kMaxParticleStep = 1e-3;

using ForceField = std::function<Vec3(const Vec3&)>;

/// Drag force on a sphere of radius `radius` moving at `velocity` through still air.
Vec3 drag_force(const Vec3& velocity, double radius, const Environment& env);

/// Semi-implicit Euler under acoustic force, weight and drag.
/// An empty `acoustic` means no acoustic force.
ParticleState step_particle(const ParticleState& particle, const ForceField& acoustic, double dt,
                            const Environment& env = {});

struct Equilibrium {
    Vec3 point = Vec3::Zero();
    bool converged = false;
    int iterations = 0;
    double residual_force = 0.0;  ///< N
};

/// Newton search for acoustic force + weight = 0 starting at `start`.
Equilibrium find_equilibrium(const field::GorkovEvaluator& evaluator, const Vec3& start, double mass,
                             const Environment& env = {});

enum class ScenarioKind { independent, cooperative };

struct ArrayConfig {
    int rows = 8;
    int cols = 8;
    double pitch = 0.0103;          ///< m
    double focal_distance = 0.05;   ///< m, single-sided trap height above the array
    double separation = 0.12;       ///< m, face-to-face array spacing
    double mount_height = 0.1;      ///< m, array center above the floor
    bool twin_trap = true;          ///< single-sided signature: twin trap (true) or plain focus
    field::AmplitudeModel amplitude = field::AmplitudeModel::calibrated(1.0);

    bool operator==(const ArrayConfig&) const = default;
};

struct ClockSetup {
    bool ideal = true;  ///< zero offset throughout; other fields ignored
    clock::OscillatorModel leader;
    clock::OscillatorModel follower;
    clock::SyncProtocol protocol = clock::SyncProtocol::ir_pulse();
    double sample_interval = 0.0;  ///< s, <= 0 picks period / 10

    bool operator==(const ClockSetup&) const = default;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::independent;
    MediumParams medium;
    ArrayConfig array;
    drive::RobotParams robot;
    drive::TwoLayerGains steering;
    formation::PIDGains pid;
    double desired_gap = 0.12;
    double collision_gap = 0.06;
    double message_delay = 0.0;
    ParticleState particle;
    double velocity = 0.05;  ///< m/s, cruise (independent) or leader speed (cooperative)
    double heading = 0.0;    ///< rad, cooperative track direction
    double duration = 12.0;  ///< s
    double dt = 1e-4;        ///< s
    std::vector<std::array<double, 2>> waypoints{{0.5, 0.0}};
    ClockSetup clock;
    field::GorkovMode gorkov_mode = field::GorkovMode::standard;
    double capture_radius = 0.0;  ///< m, <= 0 picks lambda / 2
    Environment environment;

    bool operator==(const Scenario&) const = default;
};

struct SimSample {
    double t = 0.0;
    drive::RobotPose leader;
    drive::RobotPose follower;  ///< NaN for single-robot runs
    Vec3 particle_position = Vec3::Zero();
    Vec3 particle_velocity = Vec3::Zero();
    Vec3 trap_center = Vec3::Zero();
    double node_shift = 0.0;  ///< m
    double field_abs = 0.0;   ///< Pa at the particle
    bool captured = true;
};

struct SimTrace {
    std::vector<SimSample> samples;
    double dt = 0.0;
    double capture_radius = 0.0;
    double goal_tolerance = 0.01;
    std::optional<std::array<double, 2>> final_waypoint;
};

struct TransportMetrics {
    bool retained = true;
    Vec3 oscillation_amplitude = Vec3::Zero();  ///< m, max |particle - trap| per axis
    double mean_lag = 0.0;                      ///< m, mean along-track (trap - particle)
    double transport_time = 0.0;                ///< s, NaN if the final waypoint was never reached
};

TransportMetrics compute_metrics(const SimTrace& trace);

struct TrapReport {
    Vec3 equilibrium_local = Vec3::Zero();
    bool equilibrium_converged = false;
    field::TrapStiffness stiffness;
};

struct RunResult {
    SimTrace trace;
    TransportMetrics metrics;
    TrapReport trap;
    std::vector<std::string> warnings;
    std::optional<clock::SyncTrace> sync;
};

/// Single upward-facing array on one robot following waypoints.
RunResult run_independent(const Scenario& scenario);

/// Two face-to-face arrays in leader-follower formation; the follower's phases carry the
/// clock-offset phase error. `sync` overrides the scenario's clock simulation when given.
RunResult run_cooperative(const Scenario& scenario, const clock::SyncTrace* sync = nullptr);

/// Dispatches on scenario.kind.
RunResult run_scenario(const Scenario& scenario);

/// Single-sided reference array (local frame, +z up) focused or twin-trapped at focal_distance.
field::PhasedArray single_sided_array(const ArrayConfig& config, const MediumParams& medium, bool twin_trap);

/// Face-to-face pair in local frames (+z toward the joint point at separation/2).
/// The follower carries sigma = `follower_signature` on every element.
std::array<field::PhasedArray, 2> face_to_face_arrays(const ArrayConfig& config, const MediumParams& medium,
                                                      double follower_signature);

/// Simulated single-sided focal pressure the amplitude constant is calibrated against, Pa.
inline constexpr double kReferenceFocalPressure = 4469.9;

struct Calibration {
    double unit_aggregate = 0.0;       ///< X = |sum exp(j..)/d| at the focus, 1/m
    double reference_amplitude = 0.0;  ///< A = target / X, Pa*m
    double target_pressure = 0.0;      ///< Pa
    double achieved_pressure = 0.0;    ///< Pa, re-evaluated with A
};

/// Closed-form A for the single-sided plain focus at config.focal_distance.
/// Throws CalibrationError when the field at the focus vanishes.
Calibration calibrate_amplitude(const ArrayConfig& config, const MediumParams& medium,
                                double target_pressure = kReferenceFocalPressure);

/// |P| at the joint focus of the face-to-face pair, both arrays plain-focused (sigma = 0).
double face_to_face_focal_pressure(const ArrayConfig& config, const MediumParams& medium,
                                   const field::AmplitudeModel& model);

}  // namespace sonotrans::transport
