#include "sonotrans/formation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sonotrans::formation {

void PIDGains::validate() const {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0) throw ConfigurationError("pid: gains must be non-negative");
    if (!(integral_limit > 0.0) || !(output_limit > 0.0)) {
        throw ConfigurationError("pid: integral_limit and output_limit must be positive");
    }
}

void FormationParams::validate() const {
    pid.validate();
    steering.validate();
    robot.validate();
    if (!(desired_gap > 0.0)) throw ConfigurationError("formation: desired_gap must be positive");
    if (!(collision_gap >= 0.0) || collision_gap >= desired_gap) {
        throw ConfigurationError("formation: collision_gap must be in [0, desired_gap)");
    }
    if (message_delay < 0.0) throw ConfigurationError("formation: message_delay must be >= 0");
}

LeaderSample leader_position(const LeaderTrajectory& trajectory, double t) {
    if (t < 0.0) throw ConfigurationError("leader_position: t must be >= 0");
    LeaderSample s;
    s.along_track = trajectory.x0 + trajectory.speed * t;
    s.pose.x = trajectory.origin_x + s.along_track * std::cos(trajectory.heading);
    s.pose.y = trajectory.origin_y + s.along_track * std::sin(trajectory.heading);
    s.pose.theta = wrap_angle(trajectory.heading);
    return s;
}

FollowerPid::FollowerPid(PIDGains gains, double desired_gap) : gains_(gains), desired_gap_(desired_gap) {
    gains_.validate();
}

void FollowerPid::reset() {
    integral_ = 0.0;
    previous_error_ = 0.0;
    filtered_derivative_ = 0.0;
    primed_ = false;
}

double FollowerPid::update(double leader_x, double follower_x, double leader_speed, double dt) {
    if (!(dt > 0.0)) throw ConfigurationError("follower_velocity: dt must be positive");
    const double error = (leader_x - follower_x) - desired_gap_;
    if (!primed_) {
        previous_error_ = error;
        primed_ = true;
    }
    integral_ += 0.5 * (error + previous_error_) * dt;
    integral_ = std::clamp(integral_, -gains_.integral_limit, gains_.integral_limit);

    const double tau = 5.0 * dt;
    const double raw_derivative = (error - previous_error_) / dt;
    filtered_derivative_ += dt / (tau + dt) * (raw_derivative - filtered_derivative_);
    previous_error_ = error;

    const double v = leader_speed + gains_.kp * error + gains_.ki * integral_ + gains_.kd * filtered_derivative_;
    return std::clamp(v, -gains_.output_limit, gains_.output_limit);
}

FormationController::FormationController(FormationParams params, LeaderTrajectory trajectory,
                                         std::function<double()> delay_sampler)
    : params_(params),
      trajectory_(trajectory),
      delay_sampler_(std::move(delay_sampler)),
      pid_(params.pid, params.desired_gap) {
    params_.validate();
    latest_ = {0.0, leader_position(trajectory_, 0.0).along_track, trajectory_.speed};
}

double FormationController::along_track(double x, double y) const {
    return (x - trajectory_.origin_x) * std::cos(trajectory_.heading) +
           (y - trajectory_.origin_y) * std::sin(trajectory_.heading);
}

double FormationController::gap(const FormationState& state) const {
    return along_track(state.follower.x, state.follower.y) - along_track(state.leader.x, state.leader.y);
}

FormationState FormationController::initial_state(double gap_error) const {
    FormationState s;
    s.leader = leader_position(trajectory_, 0.0).pose;
    const double g = params_.desired_gap + gap_error;
    s.follower.x = s.leader.x + g * std::cos(trajectory_.heading);
    s.follower.y = s.leader.y + g * std::sin(trajectory_.heading);
    s.follower.theta = wrap_angle(trajectory_.heading + kPi);
    return s;
}

FormationState FormationController::step(const FormationState& state, double t, double dt) {
    if (!(dt > 0.0)) throw ConfigurationError("formation_step: dt must be positive");

    // Leader publishes its along-track state; the follower consumes whatever has arrived.
    const LeaderSample now = leader_position(trajectory_, t);
    const double delay = delay_sampler_ ? std::max(0.0, delay_sampler_()) : params_.message_delay;
    in_flight_.emplace_back(t + delay, LeaderMessage{t, now.along_track, trajectory_.speed});
    while (!in_flight_.empty() && in_flight_.front().first <= t) {
        if (in_flight_.front().second.sent_at >= latest_.sent_at) latest_ = in_flight_.front().second;
        in_flight_.pop_front();
    }

    FormationState next = state;
    next.leader = leader_position(trajectory_, t + dt).pose;

    // Along-track coordinates measured in the follower's facing direction (-track), so
    // the gap law applies unchanged while the follower walks backward.
    const double facing_leader = -latest_.along_track;
    const double facing_follower = -along_track(state.follower.x, state.follower.y);
    const double body_speed = pid_.update(facing_leader, facing_follower, -latest_.speed, dt);

    const double heading_goal = wrap_angle(trajectory_.heading + kPi);
    const double theta_dot = params_.steering.k_orient * wrap_angle(heading_goal - state.follower.theta);

    const drive::WheelCommand cmd = drive::inverse_kinematics(body_speed, theta_dot, params_.robot);
    const drive::BodyTwist twist = drive::forward_kinematics(cmd, params_.robot);
    next.follower = drive::integrate_pose(state.follower, twist.linear, twist.angular, dt);

    const double g = gap(next);
    if (g < params_.collision_gap) {
        std::ostringstream msg;
        msg << "follower-leader gap " << g << " m below collision threshold " << params_.collision_gap
            << " m at t = " << t + dt << " s";
        throw CollisionError(msg.str());
    }
    return next;
}

}  // namespace sonotrans::formation
