#include "doctest.h"
#include "support.hpp"

#include "sonotrans/drive_control.hpp"

#include <cmath>
#include <random>

using namespace sonotrans;
using namespace sonotrans::drive;
using testing::rel;

namespace {

RobotParams params(double r, double l) {
    RobotParams p;
    p.wheel_radius = r;
    p.wheel_base = l;
    p.max_wheel_speed = 1e6;
    return p;
}

// Reference arcs from fine-step Euler, dt = 1e-5.
RobotPose euler(RobotPose p, double v, double w, double duration) {
    const double dt = 1e-5;
    const int n = static_cast<int>(std::lround(duration / dt));
    for (int i = 0; i < n; ++i) {
        p.x += v * std::cos(p.theta) * dt;
        p.y += v * std::sin(p.theta) * dt;
        p.theta += w * dt;
    }
    return p;
}

}  // namespace

TEST_CASE("forward kinematics") {
    const auto p = params(0.02, 0.1);
    auto t = forward_kinematics({10.0, 10.0}, p);
    CHECK(t.linear == rel(0.2, 1e-15));
    CHECK(t.angular == 0.0);
    t = forward_kinematics({3.0, -3.0}, p);
    CHECK(t.linear == 0.0);
    CHECK(t.angular == rel(-1.2, 1e-15));
    t = forward_kinematics({0.0, 10.0}, p);
    CHECK(t.linear == rel(0.1, 1e-15));
    CHECK(t.angular == rel(2.0, 1e-15));
}

TEST_CASE("inverse kinematics") {
    const auto p = params(0.02, 0.1);
    auto c = inverse_kinematics(0.2, 0.0, p);
    CHECK(c.right == rel(10.0, 1e-15));
    CHECK(c.left == rel(10.0, 1e-15));
    c = inverse_kinematics(0.0, 2.0, p);
    CHECK(c.left == rel(5.0, 1e-15));
    CHECK(c.right == rel(-5.0, 1e-15));

    SUBCASE("round trip") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> v(-0.5, 0.5), w(-5.0, 5.0);
        const RobotParams mona;
        for (int i = 0; i < 1000; ++i) {
            const double vi = v(rng);
            const double wi = w(rng);
            const auto back = forward_kinematics(inverse_kinematics_unclamped(vi, wi, mona), mona);
            CHECK(std::abs(back.linear - vi) < 1e-12);
            CHECK(std::abs(back.angular - wi) < 1e-12);
        }
    }
    SUBCASE("clamping keeps the v:w ratio") {
        RobotParams mona;
        mona.max_wheel_speed = 10.0;
        const auto raw = forward_kinematics(inverse_kinematics_unclamped(0.4, 3.0, mona), mona);
        const auto cmd = inverse_kinematics(0.4, 3.0, mona);
        CHECK(std::max(std::abs(cmd.left), std::abs(cmd.right)) == rel(10.0, 1e-12));
        const auto clamped = forward_kinematics(cmd, mona);
        CHECK(clamped.linear / clamped.angular == rel(raw.linear / raw.angular, 1e-12));
        const auto slow = inverse_kinematics(0.05, 0.1, mona);
        const auto exact = inverse_kinematics_unclamped(0.05, 0.1, mona);
        CHECK(slow.left == exact.left);
        CHECK(slow.right == exact.right);
    }
    SUBCASE("invalid params") {
        CHECK_THROWS_AS(params(0.0, 0.1).validate(), ConfigurationError);
        CHECK_THROWS_AS(params(0.02, -1.0).validate(), ConfigurationError);
    }
}

TEST_CASE("integrate_pose") {
    SUBCASE("straight") {
        const auto p = integrate_pose({}, 0.1, 0.0, 1.0);
        CHECK(p.x == rel(0.1, 1e-15));
        CHECK(p.y == 0.0);
        CHECK(p.theta == 0.0);
    }
    SUBCASE("spin in place") {
        const auto p = integrate_pose({0.3, -0.2, 0.0}, 0.0, kPi, 1.0);
        CHECK(p.x == 0.3);
        CHECK(p.y == -0.2);
        CHECK(p.theta == rel(kPi, 1e-15));
    }
    SUBCASE("unit-radius arc") {
        const auto p = integrate_pose({}, 0.1, 0.1, 1.0);
        const auto ref = euler({}, 0.1, 0.1, 1.0);
        CHECK(std::hypot(p.x, p.y - 1.0) == rel(1.0, 1e-12));
        CHECK(p.theta == rel(0.1, 1e-12));
        CHECK(std::hypot(p.x - ref.x, p.y - ref.y) < 1e-6);
    }
    SUBCASE("arc against Euler at 0.5 rad/s") {
        const RobotPose start{0.2, 0.4, 2.5};
        const auto p = integrate_pose(start, 0.1, 0.5, 1.0);
        const auto ref = euler(start, 0.1, 0.5, 1.0);
        CHECK(std::hypot(p.x - ref.x, p.y - ref.y) < 1e-6);
        CHECK(std::abs(wrap_angle(p.theta - ref.theta)) < 1e-9);
    }
    SUBCASE("heading stays wrapped") {
        RobotPose p{0.0, 0.0, 3.0};
        for (int i = 0; i < 100; ++i) {
            p = integrate_pose(p, 0.05, 1.3, 0.37);
            CHECK(p.theta > -kPi);
            CHECK(p.theta <= kPi);
        }
    }
}

TEST_CASE("go_to_pose") {
    const TwoLayerGains gains;
    RobotParams mona;
    mona.min_effective_speed = 0.0;

    SUBCASE("at goal") {
        const RobotPose here{0.4, 0.7, 0.3};
        const auto c = go_to_pose(here, here, gains, mona);
        CHECK(c.left == 0.0);
        CHECK(c.right == 0.0);
    }
    SUBCASE("goal straight ahead") {
        const auto t = go_to_pose_twist({}, {1.0, 0.0, 0.0}, gains, mona);
        CHECK(t.linear == rel(0.5, 1e-12));
        CHECK(t.angular == 0.0);
    }
    SUBCASE("goal behind turns first") {
        const auto t = go_to_pose_twist({}, {-1.0, 0.0, 0.0}, gains, mona);
        CHECK(std::abs(t.angular) == rel(gains.k_orient * kPi, 1e-12));
        CHECK(std::abs(bearing_error({}, {-1.0, 0.0, 0.0})) == rel(kPi, 1e-12));
    }
    SUBCASE("orientation layer inside tolerance") {
        const auto t = go_to_pose_twist({0.0, 0.0, 0.0}, {0.005, 0.0, 1.0}, gains, mona);
        CHECK(t.linear == 0.0);
        CHECK(t.angular == rel(gains.k_orient * 1.0, 1e-12));
    }
    SUBCASE("speed floor and cap") {
        RobotParams floored;
        TwoLayerGains capped = gains;
        capped.max_speed = 0.1;
        CHECK(go_to_pose_twist({}, {0.05, 0.0, 0.0}, gains, floored).linear == rel(0.05, 1e-12));
        CHECK(go_to_pose_twist({}, {2.0, 0.0, 0.0}, capped, floored).linear == rel(0.1, 1e-12));
    }
    SUBCASE("bearing error wrap") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        for (int i = 0; i < 1000; ++i) {
            const double e = bearing_error({u(rng), u(rng), wrap_angle(u(rng))}, {u(rng), u(rng), 0.0});
            CHECK(e > -kPi);
            CHECK(e <= kPi);
        }
    }
}

TEST_CASE("go_to_pose converges across the arena") {
    const TwoLayerGains gains;
    const RobotParams mona;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(0.0, 1.5), uy(0.0, 3.0), uth(-kPi, kPi);
    const double dt = 0.01;
    int converged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RobotPose pose{ux(rng), uy(rng), uth(rng)};
        const RobotPose goal{ux(rng), uy(rng), uth(rng)};
        bool done = false;
        for (int step = 0; step < 20000 && !done; ++step) {
            const auto cmd = go_to_pose(pose, goal, gains, mona);
            const auto tw = forward_kinematics(cmd, mona);
            pose = integrate_pose(pose, tw.linear, tw.angular, dt);
            done = std::hypot(goal.x - pose.x, goal.y - pose.y) < gains.goal_tolerance &&
                   std::abs(wrap_angle(goal.theta - pose.theta)) < gains.heading_tolerance;
        }
        if (done) ++converged;
    }
    CHECK(converged == 100);
}
