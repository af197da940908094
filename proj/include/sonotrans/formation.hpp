#pragma once

#include "sonotrans/drive_control.hpp"

#include <deque>
#include <functional>

namespace sonotrans::formation {

using drive::RobotPose;

/// Joint state {x_L, y_L, theta_L, x_F, y_F, theta_F, dt}.
struct FormationState {
    RobotPose leader;
    RobotPose follower;
    double clock_offset = 0.0;  ///< s, follower clock minus leader clock
};

struct PIDGains {
    double kp = 2.0;               ///< 1/s
    double ki = 0.5;               ///< 1/s^2
    double kd = 0.1;               ///< dimensionless
    double integral_limit = 0.05;  ///< m*s
    double output_limit = 0.2;     ///< m/s

    void validate() const;
    bool operator==(const PIDGains&) const = default;
};

/// Constant-velocity leader: along-track position x0 + v t on a fixed heading through `origin`.
struct LeaderTrajectory {
    double x0 = 0.0;       ///< m, along-track start
    double speed = 0.05;   ///< v_L, m/s
    double heading = 0.0;  ///< rad
    double origin_x = 0.0;
    double origin_y = 0.0;

    bool operator==(const LeaderTrajectory&) const = default;
};

struct LeaderSample {
    double along_track = 0.0;
    RobotPose pose;
};

LeaderSample leader_position(const LeaderTrajectory& trajectory, double t);

/// Discrete PID on the along-track gap:
/// v_F = v_L + Kp e + Ki I + Kd de/dt, e = (x_L - x_F) - desired_gap.
/// Trapezoidal integral with clamping, derivative low-passed with time constant 5 dt.
class FollowerPid {
public:
    FollowerPid(PIDGains gains, double desired_gap);

    double update(double leader_x, double follower_x, double leader_speed, double dt);
    void reset();

    [[nodiscard]] double integral() const { return integral_; }
    [[nodiscard]] double last_error() const { return previous_error_; }
    [[nodiscard]] const PIDGains& gains() const { return gains_; }

private:
    PIDGains gains_;
    double desired_gap_;
    double integral_ = 0.0;
    double previous_error_ = 0.0;
    double filtered_derivative_ = 0.0;
    bool primed_ = false;
};

struct FormationParams {
    PIDGains pid;
    drive::TwoLayerGains steering;
    drive::RobotParams robot;
    double desired_gap = 0.12;    ///< m, equals the face-to-face array separation
    double collision_gap = 0.06;  ///< m
    double message_delay = 0.0;   ///< s, fixed leader->follower delivery delay

    void validate() const;
    bool operator==(const FormationParams&) const = default;
};

/// Leader message {t, x_L, v_L} as seen by the follower.
struct LeaderMessage {
    double sent_at = 0.0;
    double along_track = 0.0;
    double speed = 0.0;
};

/// Leader moves at constant speed along its track; the follower stands `desired_gap` ahead
/// facing the leader and walks backward, regulating along-track speed with FollowerPid and
/// heading with the orientation layer of the two-layer controller.
class FormationController {
public:
    /// `delay_sampler`, when set, draws a per-message delivery delay and overrides message_delay.
    FormationController(FormationParams params, LeaderTrajectory trajectory,
                        std::function<double()> delay_sampler = {});

    /// Initial state: leader on its trajectory at t = 0, follower at the desired gap facing it.
    [[nodiscard]] FormationState initial_state(double gap_error = 0.0) const;

    /// Advances both robots from t to t + dt.
    FormationState step(const FormationState& state, double t, double dt);

    /// Along-track coordinate of a point.
    [[nodiscard]] double along_track(double x, double y) const;
    /// Signed gap follower - leader along the track.
    [[nodiscard]] double gap(const FormationState& state) const;

    [[nodiscard]] const FollowerPid& pid() const { return pid_; }
    [[nodiscard]] const FormationParams& params() const { return params_; }
    [[nodiscard]] const LeaderTrajectory& trajectory() const { return trajectory_; }

private:
    FormationParams params_;
    LeaderTrajectory trajectory_;
    std::function<double()> delay_sampler_;
    FollowerPid pid_;
    std::deque<std::pair<double, LeaderMessage>> in_flight_;  ///< (deliver_at, message)
    LeaderMessage latest_{};
};

}  // namespace sonotrans::formation
