#include <doctest.h>

#include <cmath>

#include "h2tail/plant.hpp"

using namespace h2tail;

#define CHECK_NEAR(a, b, tol) CHECK(std::fabs((a) - (b)) <= (tol))

namespace {
constexpr double kD2R = M_PI / 180.0;

// forward flight toward +x with the nose pitched up from the path
Eigen::Quaterniond forward_attitude(double pitch_rad) {
    return hover_attitude(0.0) *
           Eigen::Quaterniond(Eigen::AngleAxisd(-(M_PI / 2.0 - pitch_rad), Eigen::Vector3d::UnitY()));
}
}

TEST_SUITE_BEGIN("plant");

TEST_CASE("lift curve: linear region value") {
    AeroModel m;
    // cl0 + cl_alpha * 5 deg
    CHECK_NEAR(lift_coefficient(5.0 * kD2R, m), 0.719, 0.001);
    CHECK_NEAR(lift_coefficient(0.0, m), 0.3, 1e-12);
}

TEST_CASE("lift curve: flat plate at 90 degrees") {
    AeroModel m;
    CHECK_NEAR(lift_coefficient(90.0 * kD2R, m), 0.0, 1e-12);
    CHECK_NEAR(lift_coefficient(-90.0 * kD2R, m), 0.0, 1e-12);
}

TEST_CASE("lift curve: gentle stall keeps 85 percent ten degrees past onset") {
    AeroModel m;
    double at_stall = lift_coefficient(m.alpha_stall_deg * kD2R, m);
    double past = lift_coefficient((m.alpha_stall_deg + 10.0) * kD2R, m);
    CHECK(past / at_stall >= 0.85);
    // and the negative side mirrors the behavior
    double at_neg = lift_coefficient(-m.alpha_stall_deg * kD2R, m);
    double past_neg = lift_coefficient(-(m.alpha_stall_deg + 10.0) * kD2R, m);
    CHECK(past_neg / at_neg >= 0.85);  // both negative, ratio positive
}

TEST_CASE("lift curve: monotone up to stall, continuous and smooth across it") {
    AeroModel m;
    double prev = lift_coefficient(-0.1 * kD2R, m);
    for (double a = 0.0; a <= m.alpha_stall_deg; a += 0.1) {
        double cl = lift_coefficient(a * kD2R, m);
        CHECK(cl >= prev);
        prev = cl;
    }
    // continuity over the whole [-90, 90] sweep: no step larger than what a
    // 0.1 degree move can explain
    prev = lift_coefficient(-90.0 * kD2R, m);
    for (double a = -89.9; a <= 90.0; a += 0.1) {
        double cl = lift_coefficient(a * kD2R, m);
        CHECK(std::fabs(cl - prev) < 0.02);
        prev = cl;
    }
}

TEST_CASE("aero wrench: zero airspeed gives zero wings and surfaces") {
    VehicleParams p;
    VehicleState s;
    s.attitude = hover_attitude();
    Wrench w = aero_wrench(s, Eigen::Vector3d::Zero(), {0, 0, 0, 0}, p);
    CHECK_NEAR(w.force.norm(), 0.0, 1e-12);
    CHECK_NEAR(w.moment.norm(), 0.0, 1e-12);
}

TEST_CASE("aero wrench: drag opposes a pure vertical descent in hover") {
    VehicleParams p;
    VehicleState s;
    s.attitude = hover_attitude();
    s.velocity = Eigen::Vector3d(0, 0, -4.0);  // descending
    Wrench w = aero_wrench(s, Eigen::Vector3d::Zero(), {0, 0, 0, 0}, p);
    Eigen::Vector3d f_world = s.attitude * w.force;
    CHECK(f_world.z() > 0.1);                 // opposes the descent
    CHECK_NEAR(f_world.x(), 0.0, 1e-6);
    CHECK_NEAR(f_world.y(), 0.0, 1e-6);
}

TEST_CASE("trim at 20 m/s: lift carries the weight within 2 percent") {
    VehicleParams p;
    const double v = 20.0;
    const double w_target = p.mass_kg * p.gravity;

    // solve pitch and thrust for straight level flight at 20 m/s by a
    // coarse-to-fine scan over pitch with thrust from the x-balance
    auto net = [&](double pitch_rad, double* lift_out) {
        VehicleState s;
        // level flight toward +x, nose pitched up from the path by alpha
        s.attitude = forward_attitude(pitch_rad);
        s.velocity = Eigen::Vector3d(v, 0, 0);
        Wrench w = aero_wrench(s, Eigen::Vector3d::Zero(), {0, 0, 0, 0}, p);
        Eigen::Vector3d f_w = s.attitude * w.force;
        // thrust along body x cancels the x-deficit
        Eigen::Vector3d bx = s.attitude * Eigen::Vector3d::UnitX();
        double thrust = -f_w.x() / bx.x();
        Eigen::Vector3d total = f_w + thrust * bx;
        if (lift_out) *lift_out = f_w.z();
        return total.z() - w_target;  // vertical balance residual
    };

    double lo = 0.0, hi = 12.0 * kD2R;
    double dummy;
    REQUIRE(net(lo, &dummy) < 0.0);
    REQUIRE(net(hi, &dummy) > 0.0);
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (net(mid, &dummy) < 0.0 ? lo : hi) = mid;
    }
    double lift = 0.0;
    net(0.5 * (lo + hi), &lift);
    CHECK_NEAR(lift, w_target, 0.02 * w_target);
    // trim angle lands in the intended 4..8 degree band
    CHECK(0.5 * (lo + hi) / kD2R > 4.0);
    CHECK(0.5 * (lo + hi) / kD2R < 8.0);
}

TEST_CASE("motor power: calibration points") {
    VehicleParams p;
    // command zero: no thrust, no power
    CHECK(motor_electrical_power(0.0, 0.0, p) == 0.0);
    // hover: 12 motors carrying the weight at zero inflow draw ~1500 W
    double per_motor = p.mass_kg * p.gravity / kMotorCount;
    double total = kMotorCount * motor_electrical_power(per_motor, 0.0, p);
    CHECK_NEAR(total, 1500.0, 150.0);
    // windmilling: thrust near zero means power near zero
    CHECK(motor_electrical_power(1e-6, 20.0, p) < 0.01);
}

TEST_CASE("step dynamics: one second of free fall") {
    VehicleParams p;
    p.contact_points.clear();  // vacuum drop, no floor
    VehicleState s;
    s.position.z() = 1000.0;
    for (int i = 0; i < 500; ++i) step_dynamics(s, p, Wrench{}, 0.002);
    CHECK_NEAR(s.velocity.z(), -9.81, 1e-6);
}

TEST_CASE("step dynamics: hover thrust balances gravity") {
    VehicleParams p;
    p.contact_points.clear();
    VehicleState s;
    s.position.z() = 10.0;
    s.attitude = hover_attitude();
    Wrench w;
    w.force = Eigen::Vector3d(p.mass_kg * p.gravity, 0, 0);  // along body x = world up
    for (int i = 0; i < 500; ++i) step_dynamics(s, p, w, 0.002);
    CHECK_NEAR(s.velocity.norm(), 0.0, 1e-9);
    CHECK_NEAR(s.acceleration.norm(), 0.0, 1e-9);
}

TEST_CASE("step dynamics: constant moment about one principal axis") {
    VehicleParams p;
    p.contact_points.clear();
    VehicleState s;
    s.position.z() = 100.0;
    Wrench w;
    w.moment = Eigen::Vector3d(0.4, 0, 0);
    double tau = 2.0;
    int n = 1000;
    for (int i = 0; i < n; ++i) step_dynamics(s, p, w, tau / n);
    CHECK_NEAR(s.angular_rate.x(), 0.4 * tau / p.inertia.x(), 1e-6);
}

TEST_CASE("quaternion norm stays unit over a million steps") {
    VehicleParams p;
    p.contact_points.clear();
    VehicleState s;
    s.position.z() = 1e7;  // long fall, irrelevant
    s.angular_rate = Eigen::Vector3d(1.0, 2.0, 0.5);
    for (int i = 0; i < 1000000; ++i) step_dynamics(s, p, Wrench{}, 0.002);
    CHECK_NEAR(s.attitude.norm(), 1.0, 1e-9);
}

TEST_CASE("torque-free tumbling conserves rotational energy") {
    VehicleParams p;
    p.contact_points.clear();
    VehicleState s;
    s.position.z() = 1e7;
    s.angular_rate = Eigen::Vector3d(1.0, 2.0, 0.5);
    auto energy = [&]() {
        const Eigen::Vector3d& om = s.angular_rate;
        return 0.5 * om.dot(p.inertia.cwiseProduct(om));
    };
    double e0 = energy();
    for (int i = 0; i < 60000; ++i) step_dynamics(s, p, Wrench{}, 0.001);
    CHECK(std::fabs(energy() - e0) / e0 < 0.001);
}

TEST_CASE("vehicle at rest on the ground stays at rest") {
    VehicleParams p;
    VehicleState s;
    s.attitude = ground_attitude(p);
    double lowest = min_contact_clearance(s, p);
    s.position.z() = -lowest - p.mass_kg * p.gravity / (p.contact_stiffness * 4.0);
    Eigen::Vector3d pos0 = s.position;
    for (int i = 0; i < 2500; ++i) step_dynamics(s, p, Wrench{}, 0.002);  // five seconds
    CHECK((s.position - pos0).head<2>().norm() < 1e-3);
    CHECK(s.velocity.norm() < 1e-3);
    // settles at the resting pitch
    double tilt = tilt_from_vertical(s.attitude) / kD2R;
    CHECK_NEAR(tilt, -p.ground_pitch_deg, 5.0);
}

TEST_CASE("aero wrench continuity across the stall in 0.1 degree steps") {
    VehicleParams p;
    const double v = 15.0;
    const double limit = 0.01 * p.mass_kg * p.gravity;  // 1 percent of weight
    Eigen::Vector3d prev_force;
    bool first = true;
    for (double a = 5.0; a <= 40.0; a += 0.1) {
        VehicleState s;
        s.attitude = forward_attitude(a * kD2R);
        s.velocity = Eigen::Vector3d(v, 0, 0);
        Wrench w = aero_wrench(s, Eigen::Vector3d::Zero(), {0, 0, 0, 0}, p);
        Eigen::Vector3d f_world = s.attitude * w.force;
        if (!first) CHECK((f_world - prev_force).norm() < limit);
        prev_force = f_world;
        first = false;
    }
}

TEST_CASE("wind model is deterministic per seed") {
    WindModel a(Eigen::Vector3d(5, 0, 0), 1.0, 42);
    WindModel b(Eigen::Vector3d(5, 0, 0), 1.0, 42);
    WindModel c(Eigen::Vector3d(5, 0, 0), 1.0, 43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        Eigen::Vector3d wa = a.step(0.002), wb = b.step(0.002), wc = c.step(0.002);
        if (wa != wb) all_equal = false;
        if (wa != wc) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("reversed motor pushes backward through the plant") {
    VehicleParams p;
    p.contact_points.clear();
    PlantState ps;
    ps.vehicle.position.z() = 100.0;
    ps.vehicle.attitude = hover_attitude();
    ps.motor_reversed[0] = true;
    ActuatorVector u = ActuatorVector::Zero();
    u[0] = 1.0;
    for (int i = 0; i < 200; ++i) plant_step(ps, p, u, 0.002);
    CHECK(ps.motor_thrust[0] > 0.0);  // motor spins
    // but the world-frame push is downward (reversed)
    CHECK(ps.vehicle.velocity.z() < -0.1);
}

TEST_SUITE_END();
