#include "sonotrans/transport.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <sstream>

namespace sonotrans::transport {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 weight_vector(double mass, const Environment& env) { return Vec3(0.0, 0.0, -mass * env.gravity); }

double capture_radius_for(const Scenario& s) {
    return s.capture_radius > 0.0 ? s.capture_radius : s.medium.wavelength() / 2.0;
}

void validate_scenario(const Scenario& s, std::vector<std::string>& warnings) {
    s.medium.validate();
    s.robot.validate();
    s.steering.validate();
    s.array.amplitude.validate();
    if (!(s.dt > 0.0) || s.dt > kMaxParticleStep) {
        throw StepSizeError("scenario dt must be in (0, 1e-3] s");
    }
    if (!(s.duration > 0.0)) throw ConfigurationError("scenario duration must be positive");
    if (s.velocity < 0.05 || s.velocity > 0.10) {
        std::ostringstream msg;
        msg << "velocity " << s.velocity << " m/s is outside the validated 0.05-0.10 m/s envelope";
        warnings.push_back(msg.str());
    }
    if (auto w = field::validity_warning(s.particle, s.medium)) warnings.push_back(*w);
}

/// Field of `arrays` expressed in a frame moved by `pose` (arrays stored in local coordinates).
class PosedForce {
public:
    PosedForce(const field::GorkovEvaluator& local, const RigidTransform& pose) : local_(local), pose_(pose) {}
    Vec3 operator()(const Vec3& world) const { return pose_.linear() * local_.force(pose_.inverse() * world); }

private:
    const field::GorkovEvaluator& local_;
    RigidTransform pose_;
};

}  // namespace

Vec3 drag_force(const Vec3& velocity, double radius, const Environment& env) {
    double scale = 6.0 * kPi * env.viscosity * radius;
    if (env.drag_model == DragModel::schiller_naumann) {
        const double reynolds = env.air_density * velocity.norm() * 2.0 * radius / env.viscosity;
        scale *= 1.0 + 0.15 * std::pow(reynolds, 0.687);
    }
    return -scale * velocity;
}

ParticleState step_particle(const ParticleState& particle, const ForceField& acoustic, double dt,
                            const Environment& env) {
    if (!(dt > 0.0) || dt > kMaxParticleStep) {
        std::ostringstream msg;
        msg << "particle step " << dt << " s outside (0, " << kMaxParticleStep << "] s";
        throw StepSizeError(msg.str());
    }
    const double mass = particle.mass();
    Vec3 force = weight_vector(mass, env);
    if (acoustic) force += acoustic(particle.position);
    if (env.drag) force += drag_force(particle.velocity, particle.radius, env);

    ParticleState next = particle;
    next.velocity = particle.velocity + dt * force / mass;
    next.position = particle.position + dt * next.velocity;
    return next;
}

Equilibrium find_equilibrium(const field::GorkovEvaluator& evaluator, const Vec3& start, double mass,
                             const Environment& env) {
    Equilibrium eq;
    eq.point = start;
    const Vec3 weight = weight_vector(mass, env);
    const double max_step = evaluator.source().medium().wavelength() / 20.0;
    for (int it = 1; it <= 60; ++it) {
        eq.iterations = it;
        const Vec3 net = evaluator.force(eq.point) + weight;
        eq.residual_force = net.norm();
        const Mat3 hessian = evaluator.stiffness(eq.point).hessian;
        Eigen::FullPivLU<Mat3> lu(hessian);
        if (!lu.isInvertible()) break;
        Vec3 step = lu.solve(net);
        if (step.norm() > max_step) step *= max_step / step.norm();
        eq.point += step;
        if (step.norm() < 1e-13) {
            eq.converged = true;
            eq.residual_force = (evaluator.force(eq.point) + weight).norm();
            break;
        }
    }
    return eq;
}

field::PhasedArray single_sided_array(const ArrayConfig& config, const MediumParams& medium, bool twin_trap) {
    auto array = field::build_array(config.rows, config.cols, config.pitch);
    const auto signature = twin_trap ? field::twin_trap_signature(array) : field::uniform_signature(array, 0.0);
    return field::focus_phases(std::move(array), Vec3(0.0, 0.0, config.focal_distance), signature, medium);
}

std::array<field::PhasedArray, 2> face_to_face_arrays(const ArrayConfig& config, const MediumParams& medium,
                                                      double follower_signature) {
    const Vec3 joint(0.0, 0.0, 0.5 * config.separation);
    auto leader = field::build_array(config.rows, config.cols, config.pitch);
    auto follower = leader;
    leader = field::focus_phases(std::move(leader), joint, field::uniform_signature(leader, 0.0), medium);
    follower = field::focus_phases(std::move(follower), joint,
                                   field::uniform_signature(follower, follower_signature), medium);
    return {std::move(leader), std::move(follower)};
}

Calibration calibrate_amplitude(const ArrayConfig& config, const MediumParams& medium, double target_pressure) {
    medium.validate();
    if (!(target_pressure > 0.0)) throw CalibrationError("calibration target pressure must be positive");
    const std::array<field::PhasedArray, 1> arrays{single_sided_array(config, medium, false)};
    const Vec3 focus(0.0, 0.0, config.focal_distance);
    Calibration cal;
    cal.target_pressure = target_pressure;
    cal.unit_aggregate = std::abs(field::complex_pressure(arrays, focus, field::AmplitudeModel::calibrated(1.0), medium));
    if (!(cal.unit_aggregate > 1e-12)) throw CalibrationError("field vanishes at the focal point; cannot calibrate");
    cal.reference_amplitude = target_pressure / cal.unit_aggregate;
    cal.achieved_pressure =
        std::abs(field::complex_pressure(arrays, focus, field::AmplitudeModel::calibrated(cal.reference_amplitude), medium));
    return cal;
}

double face_to_face_focal_pressure(const ArrayConfig& config, const MediumParams& medium,
                                   const field::AmplitudeModel& model) {
    const auto local = face_to_face_arrays(config, medium, 0.0);
    const RigidTransform lp = facing_pose(Vec3::Zero(), 0.0);
    const RigidTransform fp = facing_pose(Vec3(config.separation, 0.0, 0.0), kPi);
    const std::array<field::PhasedArray, 2> arrays{local[0].reposed(lp), local[1].reposed(fp)};
    return std::abs(field::complex_pressure(arrays, Vec3(0.5 * config.separation, 0.0, 0.0), model, medium));
}

TransportMetrics compute_metrics(const SimTrace& trace) {
    if (trace.samples.empty()) throw ConfigurationError("compute_metrics: empty trace");
    TransportMetrics m;
    m.transport_time = kNaN;
    double lag_sum = 0.0;
    for (const auto& s : trace.samples) {
        const Vec3 deviation = s.particle_position - s.trap_center;
        m.oscillation_amplitude = m.oscillation_amplitude.cwiseMax(deviation.cwiseAbs());
        if (!s.captured || deviation.norm() > trace.capture_radius) m.retained = false;
        const Vec3 track(std::cos(s.leader.theta), std::sin(s.leader.theta), 0.0);
        lag_sum += (-deviation).dot(track);
        if (trace.final_waypoint && std::isnan(m.transport_time)) {
            const auto& goal = *trace.final_waypoint;
            if (std::hypot(s.leader.x - goal[0], s.leader.y - goal[1]) <= trace.goal_tolerance) {
                m.transport_time = s.t;
            }
        }
    }
    m.mean_lag = lag_sum / static_cast<double>(trace.samples.size());
    return m;
}

RunResult run_independent(const Scenario& scenario) {
    if (scenario.kind != ScenarioKind::independent) {
        throw ConfigurationError("run_independent: scenario kind must be independent");
    }
    RunResult result;
    validate_scenario(scenario, result.warnings);
    if (scenario.waypoints.empty()) throw ConfigurationError("run_independent: at least one waypoint required");

    const MediumParams& medium = scenario.medium;
    const Environment& env = scenario.environment;
    const field::ArrayFieldSource local_field({single_sided_array(scenario.array, medium, scenario.array.twin_trap)},
                                              scenario.array.amplitude, medium);
    const field::GorkovEvaluator evaluator(local_field, scenario.gorkov_mode, scenario.particle, env.gravity);

    const double mass = scenario.particle.mass();
    const Equilibrium eq =
        find_equilibrium(evaluator, Vec3(0.0, 0.0, scenario.array.focal_distance), mass, env);
    result.trap.equilibrium_local = eq.point;
    result.trap.equilibrium_converged = eq.converged;
    result.trap.stiffness = evaluator.stiffness(eq.point);
    if (!eq.converged) result.warnings.push_back("trap equilibrium search did not converge");
    if (!result.trap.stiffness.stable) result.warnings.push_back("trap at equilibrium is not stable");

    drive::TwoLayerGains steering = scenario.steering;
    steering.max_speed = scenario.velocity;

    drive::RobotPose robot{0.0, 0.0, scenario.heading};
    auto array_pose = [&](const drive::RobotPose& p) {
        return upward_pose(Vec3(p.x, p.y, scenario.array.mount_height), p.theta);
    };

    ParticleState particle = scenario.particle;
    particle.position = array_pose(robot) * eq.point;
    particle.velocity = Vec3::Zero();

    SimTrace& trace = result.trace;
    trace.dt = scenario.dt;
    trace.capture_radius = capture_radius_for(scenario);
    trace.goal_tolerance = steering.goal_tolerance;
    trace.final_waypoint = scenario.waypoints.back();

    std::size_t waypoint = 0;
    auto goal_for = [&](std::size_t i, const drive::RobotPose& from) {
        const auto& w = scenario.waypoints[i];
        double theta = from.theta;
        const auto& prev = i == 0 ? std::array<double, 2>{0.0, 0.0} : scenario.waypoints[i - 1];
        if (std::hypot(w[0] - prev[0], w[1] - prev[1]) > 0.0) theta = std::atan2(w[1] - prev[1], w[0] - prev[0]);
        return drive::RobotPose{w[0], w[1], theta};
    };

    bool captured = true;
    const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));
    trace.samples.reserve(steps + 1);

    auto record = [&](double t) {
        const RigidTransform pose = array_pose(robot);
        SimSample s;
        s.t = t;
        s.leader = robot;
        s.follower = {kNaN, kNaN, kNaN};
        s.particle_position = particle.position;
        s.particle_velocity = particle.velocity;
        s.trap_center = pose * eq.point;
        const Vec3 local = pose.inverse() * particle.position;
        s.field_abs = local_field.min_source_distance(local) > field::kSingularityGuard
                          ? std::abs(local_field.pressure(local))
                          : kNaN;
        if (captured && (s.particle_position - s.trap_center).norm() > trace.capture_radius) captured = false;
        s.captured = captured;
        trace.samples.push_back(s);
    };

    record(0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * scenario.dt;

        if (captured) {
            particle = step_particle(particle, PosedForce(evaluator, array_pose(robot)), scenario.dt, env);
        } else if (particle.position.z() > 0.0) {
            particle = step_particle(particle, {}, scenario.dt, env);
            if (particle.position.z() <= 0.0) {
                particle.position.z() = 0.0;
                particle.velocity.setZero();
            }
        }

        drive::RobotPose goal = goal_for(waypoint, robot);
        const double distance = std::hypot(goal.x - robot.x, goal.y - robot.y);
        if (distance <= steering.goal_tolerance && waypoint + 1 < scenario.waypoints.size()) {
            ++waypoint;
            goal = goal_for(waypoint, robot);
        }
        const auto cmd = drive::go_to_pose(robot, goal, steering, scenario.robot);
        const auto twist = drive::forward_kinematics(cmd, scenario.robot);
        robot = drive::integrate_pose(robot, twist.linear, twist.angular, scenario.dt);

        record(t + scenario.dt);
    }

    result.metrics = compute_metrics(trace);
    return result;
}

RunResult run_cooperative(const Scenario& scenario, const clock::SyncTrace* sync) {
    if (scenario.kind != ScenarioKind::cooperative) {
        throw ConfigurationError("run_cooperative: scenario kind must be cooperative");
    }
    RunResult result;
    validate_scenario(scenario, result.warnings);

    const MediumParams& medium = scenario.medium;
    const Environment& env = scenario.environment;
    const ArrayConfig& ac = scenario.array;

    if (sync) {
        result.sync = *sync;
    } else if (!scenario.clock.ideal) {
        result.sync = clock::simulate_sync(scenario.clock.leader, scenario.clock.follower, scenario.clock.protocol,
                                           scenario.duration, scenario.clock.sample_interval);
    }
    auto offset_at = [&](double t) { return result.sync ? result.sync->offset_at(t) : 0.0; };

    // A pi signature on the follower turns the joint point into a pressure node.
    const auto local_arrays = face_to_face_arrays(ac, medium, kPi);

    formation::FormationParams fp;
    fp.pid = scenario.pid;
    fp.steering = scenario.steering;
    fp.robot = scenario.robot;
    fp.desired_gap = scenario.desired_gap;
    fp.collision_gap = scenario.collision_gap;
    fp.message_delay = scenario.message_delay;
    formation::LeaderTrajectory trajectory{0.0, scenario.velocity, scenario.heading, 0.0, 0.0};
    formation::FormationController controller(fp, trajectory);
    formation::FormationState state = controller.initial_state();

    const double h = ac.mount_height;
    const double reach = 0.5 * ac.separation;
    auto poses = [&](const formation::FormationState& s) {
        return std::pair{facing_pose(Vec3(s.leader.x, s.leader.y, h), s.leader.theta),
                         facing_pose(Vec3(s.follower.x, s.follower.y, h), s.follower.theta)};
    };
    auto joint_point = [&](const formation::FormationState& s) {
        const auto [lp, fp_] = poses(s);
        return Vec3(0.5 * (lp * Vec3(0, 0, reach) + fp_ * Vec3(0, 0, reach)));
    };
    auto source_for = [&](const formation::FormationState& s, double phase_error) {
        const auto [lp, fp_] = poses(s);
        std::vector<field::PhasedArray> arrays{local_arrays[0].reposed(lp),
                                               field::with_phase_offset(local_arrays[1].reposed(fp_), phase_error)};
        return field::ArrayFieldSource(std::move(arrays), ac.amplitude, medium);
    };

    // Trap reference from the ideal-clock field at t = 0.
    const double mass = scenario.particle.mass();
    Vec3 trap_offset = Vec3::Zero();
    {
        const auto source = source_for(state, 0.0);
        const field::GorkovEvaluator evaluator(source, scenario.gorkov_mode, scenario.particle, env.gravity);
        const Vec3 joint = joint_point(state);
        const Equilibrium eq = find_equilibrium(evaluator, joint, mass, env);
        trap_offset = eq.point - joint;
        result.trap.equilibrium_local = trap_offset;
        result.trap.equilibrium_converged = eq.converged;
        result.trap.stiffness = evaluator.stiffness(eq.point);
        if (!eq.converged) result.warnings.push_back("trap equilibrium search did not converge");
        if (!result.trap.stiffness.stable) result.warnings.push_back("trap at equilibrium is not stable");
    }

    ParticleState particle = scenario.particle;
    particle.position = joint_point(state) + trap_offset;
    particle.velocity = Vec3::Zero();

    SimTrace& trace = result.trace;
    trace.dt = scenario.dt;
    trace.capture_radius = capture_radius_for(scenario);
    trace.goal_tolerance = scenario.steering.goal_tolerance;
    const auto end = formation::leader_position(trajectory, scenario.duration).pose;
    trace.final_waypoint = std::array<double, 2>{end.x, end.y};

    bool captured = true;
    const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));
    trace.samples.reserve(steps + 1);

    auto record = [&](double t, const field::ArrayFieldSource& source, double phase_error) {
        SimSample s;
        s.t = t;
        s.leader = state.leader;
        s.follower = state.follower;
        s.particle_position = particle.position;
        s.particle_velocity = particle.velocity;
        s.trap_center = joint_point(state) + trap_offset;
        s.node_shift = clock::phase_error_to_node_shift(wrap_angle(phase_error), medium);
        s.field_abs = source.min_source_distance(particle.position) > field::kSingularityGuard
                          ? std::abs(source.pressure(particle.position))
                          : kNaN;
        if (captured && (s.particle_position - s.trap_center).norm() > trace.capture_radius) captured = false;
        s.captured = captured;
        trace.samples.push_back(s);
    };

    {
        const double phase = clock::offset_to_phase_error(offset_at(0.0), medium.frequency);
        record(0.0, source_for(state, phase), phase);
    }
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * scenario.dt;
        state.clock_offset = offset_at(t);
        const double phase = clock::offset_to_phase_error(state.clock_offset, medium.frequency);

        if (captured) {
            const auto source = source_for(state, phase);
            const field::GorkovEvaluator evaluator(source, scenario.gorkov_mode, scenario.particle, env.gravity);
            particle = step_particle(
                particle, [&](const Vec3& p) { return evaluator.force(p); }, scenario.dt, env);
        } else if (particle.position.z() > 0.0) {
            particle = step_particle(particle, {}, scenario.dt, env);
            if (particle.position.z() <= 0.0) {
                particle.position.z() = 0.0;
                particle.velocity.setZero();
            }
        }

        state = controller.step(state, t, scenario.dt);
        state.clock_offset = offset_at(t + scenario.dt);
        const double next_phase = clock::offset_to_phase_error(state.clock_offset, medium.frequency);
        record(t + scenario.dt, source_for(state, next_phase), next_phase);
    }

    result.metrics = compute_metrics(trace);
    return result;
}

RunResult run_scenario(const Scenario& scenario) {
    return scenario.kind == ScenarioKind::independent ? run_independent(scenario) : run_cooperative(scenario);
}

}  // namespace sonotrans::transport
