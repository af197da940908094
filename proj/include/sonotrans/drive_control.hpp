#pragma once

#include "sonotrans/errors.hpp"
#include "sonotrans/geometry.hpp"

#include <limits>

namespace sonotrans::drive {

/// Differential-drive platform. Defaults approximate a Mona-class robot.
struct RobotParams {
    double wheel_radius = 0.017;        ///< R, m
    double wheel_base = 0.08;           ///< L, m
    double max_wheel_speed = 10.0;      ///< rad/s
    double min_effective_speed = 0.05;  ///< m/s; nonzero go-to-pose speeds are raised to this floor (0 disables)

    void validate() const;
    bool operator==(const RobotParams&) const = default;
};

struct RobotPose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;  ///< rad, (-pi, pi]

    bool operator==(const RobotPose&) const = default;
};

struct WheelCommand {
    double right = 0.0;  ///< omega_R, rad/s
    double left = 0.0;   ///< omega_L, rad/s
};

struct BodyTwist {
    double linear = 0.0;   ///< v, m/s
    double angular = 0.0;  ///< theta_dot, rad/s
};

/// Position layer followed by a final orientation layer.
struct TwoLayerGains {
    double k_pos = 0.5;               ///< 1/s
    double k_orient = 2.0;            ///< 1/s
    double goal_tolerance = 0.01;     ///< m
    double heading_tolerance = 0.05;  ///< rad
    double max_speed = std::numeric_limits<double>::infinity();  ///< cruise cap on |v|, m/s

    void validate() const;
    bool operator==(const TwoLayerGains&) const = default;
};

/// [v; theta_dot] = [R/2 R/2; -R/L R/L] [omega_R; omega_L]
BodyTwist forward_kinematics(const WheelCommand& cmd, const RobotParams& params);

/// Exact inverse of forward_kinematics, no saturation.
WheelCommand inverse_kinematics_unclamped(double v, double theta_dot, const RobotParams& params);

/// Inverse kinematics, then both wheels scaled down together if either exceeds max_wheel_speed.
WheelCommand inverse_kinematics(double v, double theta_dot, const RobotParams& params);

/// Exact unicycle arc (straight line when |theta_dot| < 1e-9).
RobotPose integrate_pose(const RobotPose& pose, double v, double theta_dot, double dt);

/// Bearing error used by the position layer, in (-pi, pi].
double bearing_error(const RobotPose& current, const RobotPose& goal);

/// Two-layer proportional go-to-pose controller.
WheelCommand go_to_pose(const RobotPose& current, const RobotPose& goal, const TwoLayerGains& gains,
                        const RobotParams& params);

/// Body twist requested by go_to_pose before inverse kinematics.
BodyTwist go_to_pose_twist(const RobotPose& current, const RobotPose& goal, const TwoLayerGains& gains,
                           const RobotParams& params);

}  // namespace sonotrans::drive
