#pragma once

#include <Eigen/Geometry>

#include <cmath>

#include <numbers>

namespace sonotrans {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RigidTransform = Eigen::Isometry3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
    double wrapped = std::remainder(angle, kTwoPi);
    if (wrapped <= -kPi) wrapped += kTwoPi;
    return wrapped;
}

/// Wraps a phase to [0, 2pi).
inline double wrap_phase(double phase) {
    double wrapped = std::fmod(phase, kTwoPi);
    if (wrapped < 0.0) wrapped += kTwoPi;
    if (wrapped >= kTwoPi) wrapped = 0.0;
    return wrapped;
}

/// Pose whose local +z axis points along the horizontal heading and local +y is world up.
/// Used for arrays mounted vertically on a robot and facing forward.
inline RigidTransform facing_pose(const Vec3& origin, double heading) {
    const Vec3 ez(std::cos(heading), std::sin(heading), 0.0);
    const Vec3 ey = Vec3::UnitZ();
    const Vec3 ex = ey.cross(ez);
    RigidTransform pose = RigidTransform::Identity();
    pose.linear().col(0) = ex;
    pose.linear().col(1) = ey;
    pose.linear().col(2) = ez;
    pose.translation() = origin;
    return pose;
}

/// Pose with local +z up, rotated about world z by yaw.
inline RigidTransform upward_pose(const Vec3& origin, double yaw) {
    RigidTransform pose = RigidTransform::Identity();
    pose.linear() = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    pose.translation() = origin;
    return pose;
}

}  // namespace sonotrans
