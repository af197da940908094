#include "sonotrans/drive_control.hpp"

#include <algorithm>
#include <cmath>

namespace sonotrans::drive {

void RobotParams::validate() const {
    if (!(wheel_radius > 0.0) || !(wheel_base > 0.0)) {
        throw ConfigurationError("robot: wheel_radius and wheel_base must be positive");
    }
    if (!(max_wheel_speed > 0.0)) throw ConfigurationError("robot: max_wheel_speed must be positive");
    if (min_effective_speed < 0.0) throw ConfigurationError("robot: min_effective_speed must be >= 0");
}

void TwoLayerGains::validate() const {
    if (!(k_pos > 0.0) || !(k_orient > 0.0)) throw ConfigurationError("gains: k_pos and k_orient must be positive");
    if (!(goal_tolerance > 0.0) || !(heading_tolerance > 0.0)) {
        throw ConfigurationError("gains: tolerances must be positive");
    }
    if (!(max_speed > 0.0)) throw ConfigurationError("gains: max_speed must be positive");
}

BodyTwist forward_kinematics(const WheelCommand& cmd, const RobotParams& params) {
    const double r = params.wheel_radius;
    const double l = params.wheel_base;
    return {0.5 * r * (cmd.right + cmd.left), (r / l) * (cmd.left - cmd.right)};
}

WheelCommand inverse_kinematics_unclamped(double v, double theta_dot, const RobotParams& params) {
    const double r = params.wheel_radius;
    const double l = params.wheel_base;
    const double common = v / r;
    const double differential = 0.5 * theta_dot * l / r;
    return {common - differential, common + differential};
}

WheelCommand inverse_kinematics(double v, double theta_dot, const RobotParams& params) {
    WheelCommand cmd = inverse_kinematics_unclamped(v, theta_dot, params);
    const double peak = std::max(std::abs(cmd.right), std::abs(cmd.left));
    if (peak > params.max_wheel_speed) {
        const double scale = params.max_wheel_speed / peak;
        cmd.right *= scale;
        cmd.left *= scale;
    }
    return cmd;
}

RobotPose integrate_pose(const RobotPose& pose, double v, double theta_dot, double dt) {
    if (!(dt > 0.0)) throw ConfigurationError("integrate_pose: dt must be positive");
    RobotPose next = pose;
    if (std::abs(theta_dot) < 1e-9) {
        next.x += v * std::cos(pose.theta) * dt;
        next.y += v * std::sin(pose.theta) * dt;
        next.theta = wrap_angle(pose.theta + theta_dot * dt);
        return next;
    }
    const double radius = v / theta_dot;
    const double heading = pose.theta + theta_dot * dt;
    next.x += radius * (std::sin(heading) - std::sin(pose.theta));
    next.y -= radius * (std::cos(heading) - std::cos(pose.theta));
    next.theta = wrap_angle(heading);
    return next;
}

double bearing_error(const RobotPose& current, const RobotPose& goal) {
    return wrap_angle(std::atan2(goal.y - current.y, goal.x - current.x) - current.theta);
}

BodyTwist go_to_pose_twist(const RobotPose& current, const RobotPose& goal, const TwoLayerGains& gains,
                           const RobotParams& params) {
    const double distance = std::hypot(goal.x - current.x, goal.y - current.y);
    if (distance > gains.goal_tolerance) {
        double v = std::min(gains.k_pos * distance, gains.max_speed);
        if (v > 0.0 && v < params.min_effective_speed) v = params.min_effective_speed;
        return {v, gains.k_orient * bearing_error(current, goal)};
    }
    return {0.0, gains.k_orient * wrap_angle(goal.theta - current.theta)};
}

WheelCommand go_to_pose(const RobotPose& current, const RobotPose& goal, const TwoLayerGains& gains,
                        const RobotParams& params) {
    const BodyTwist twist = go_to_pose_twist(current, goal, gains, params);
    return inverse_kinematics(twist.linear, twist.angular, params);
}

}  // namespace sonotrans::drive
