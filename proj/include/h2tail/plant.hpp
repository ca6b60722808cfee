/*
  Rigid-body tail-sitter plant: tandem-wing aerodynamics with a gentle
  stall, 12 lagged motors, 4 elevons, penalty ground contact with
  Coulomb friction, and a seeded colored-gust wind model.

  Body frame: x out the nose (thrust axis), y toward the right wing tip,
  z toward the belly. In hover the nose points straight up and the belly
  faces the future flight direction.
*/
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "h2tail/actuators.hpp"
#include "h2tail/config.hpp"

namespace h2tail {

struct IntegrationFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AeroModel {
    double cl0 = 0.3;
    double cl_alpha = 4.8;  // per rad
    double alpha_stall_deg = 15.0;
    double stall_blend_deg = 4.0;
    // gentle post-stall plateau: fractional lift decay per degree past stall
    double post_stall_decay_per_deg = 0.012;
    double far_blend_start_deg = 35.0;
    double far_blend_end_deg = 55.0;
    double cd0 = 0.03;
    double induced_k = 0.073;
    double plate_cd = 1.9;
    double plate_drag_onset_deg = 15.0;
    double plate_drag_full_deg = 45.0;
};

// lift/drag coefficient of one wing at angle of attack (rad)
double lift_coefficient(double alpha_rad, const AeroModel& m);
double drag_coefficient(double alpha_rad, const AeroModel& m);

struct MotorGeom {
    Eigen::Vector3d position{0, 0, 0};
    double spin = 1.0;  // +1 / -1 prop handedness (reaction torque sign)
    int wing = 0;       // 0 front, 1 back (propwash source for surfaces)
};

struct SurfaceGeom {
    Eigen::Vector3d position{0, 0, 0};
    double area_m2 = 0.035;
    double force_slope = 2.0;  // dCz/ddelta on the surface, per rad
    int wing = 0;
};

struct VehicleParams {
    double mass_kg = 10.0;
    Eigen::Vector3d inertia{0.8, 1.1, 1.5};  // principal, kg m^2
    double gravity = 9.81;
    double air_density = 1.225;

    // tandem wings
    double wing_area_front_m2 = 0.27;
    double wing_area_back_m2 = 0.33;
    Eigen::Vector3d wing_pos_front{0.45, 0.0, 0.08};
    Eigen::Vector3d wing_pos_back{-0.45, 0.0, -0.08};
    double downwash_factor = 0.9;  // back-wing dynamic pressure scale in forward flight
    AeroModel aero;
    double side_area_m2 = 0.25;
    double side_cd = 1.1;
    Eigen::Vector3d rot_damping{0.3, 0.5, 0.4};  // N m per rad/s

    std::array<MotorGeom, kMotorCount> motors;
    double max_thrust_n = 18.0;
    double motor_tau_s = 0.05;
    double prop_disc_area_m2 = 0.0856;  // 13 inch propeller
    double prop_torque_per_thrust = 0.016;
    double elec_efficiency = 0.408;
    double motor_idle_power_w = 4.0;  // per unit command, ESC/windage overhead

    std::array<SurfaceGeom, kSurfaceCount> surfaces;
    double surface_limit_rad = 0.52;
    double servo_rate_rad_s = 6.0;
    double propwash_q_factor = 0.5;  // share of disc loading seen by the elevons

    // ground interaction; resting attitude is ground_pitch from hover
    double ground_pitch_deg = -55.0;
    std::vector<Eigen::Vector3d> contact_points;
    double contact_stiffness = 8000.0;
    double contact_damping = 400.0;
    double friction_static = 0.5;
    double friction_kinetic = 0.4;
    double friction_speed_eps = 0.02;

    // thrust-proportional lift bonus from propwash over the wings near ground
    double propwash_lift_factor = 0.15;
    double propwash_lift_alt_m = 1.0;

    VehicleParams();  // fills the reference geometry

    static VehicleParams from_config(const KeyValueConfig& cfg);
};

struct VehicleState {
    Eigen::Vector3d position{0, 0, 0};   // world, z up
    Eigen::Vector3d velocity{0, 0, 0};   // world
    Eigen::Quaterniond attitude{1, 0, 0, 0};  // body -> world
    Eigen::Vector3d angular_rate{0, 0, 0};    // body
    double time_s = 0.0;
    Eigen::Vector3d acceleration{0, 0, 0};  // world, last step (measurement source)
};

struct Wrench {
    Eigen::Vector3d force{0, 0, 0};   // body frame
    Eigen::Vector3d moment{0, 0, 0};  // body frame
};

// canonical attitudes
Eigen::Quaterniond hover_attitude(double heading_rad = 0.0);
Eigen::Quaterniond ground_attitude(const VehicleParams& p, double heading_rad = 0.0);
// tilt of the thrust axis away from vertical, rad (0 in hover)
double tilt_from_vertical(const Eigen::Quaterniond& att);

// seeded first-order colored gust on top of a constant mean wind
class WindModel {
  public:
    WindModel() = default;
    WindModel(const Eigen::Vector3d& mean, double sigma, uint64_t seed, double tau_s = 2.0);
    Eigen::Vector3d step(double dt);
    Eigen::Vector3d current() const { return mean_ + gust_; }

  private:
    Eigen::Vector3d mean_{0, 0, 0};
    Eigen::Vector3d gust_{0, 0, 0};
    double sigma_ = 0.0;
    double tau_s_ = 2.0;
    uint64_t rng_state_ = 0x9e3779b97f4a7c15ull;
    double normal_sample();
};

// aerodynamic wrench (wings, surfaces, side drag, rotational damping).
// extra_surface_q adds propwash dynamic pressure over each elevon.
Wrench aero_wrench(const VehicleState& state, const Eigen::Vector3d& wind_world,
                   const std::array<double, kSurfaceCount>& surface_defl,
                   const VehicleParams& p,
                   const std::array<double, kSurfaceCount>& extra_surface_q = {});

// electrical power to hold `thrust` with the given axial inflow (momentum model)
double motor_electrical_power(double thrust_n, double axial_speed_mps, const VehicleParams& p);

// one semi-implicit step: gravity and ground contact are applied inside.
// Throws IntegrationFault when the state goes non-finite.
void step_dynamics(VehicleState& state, const VehicleParams& p, const Wrench& external_body,
                   double dt);

// lowest contact-point height above ground (negative = penetrating)
double min_contact_clearance(const VehicleState& state, const VehicleParams& p);

struct PlantState {
    VehicleState vehicle;
    std::array<double, kMotorCount> motor_thrust{};   // N, after lag
    std::array<double, kSurfaceCount> surface_defl{};  // rad, after rate limit
    WindModel wind;
    std::array<bool, kMotorCount> motor_reversed{};   // thrust sign fault
};

struct PlantStepOutput {
    double electrical_power_w = 0.0;
    Eigen::Vector3d wind_world{0, 0, 0};
    double airspeed_mps = 0.0;
};

// advance motors, servos, wind and the rigid body by dt under the given
// commands; `extra` injects an additional body wrench (disturbances)
PlantStepOutput plant_step(PlantState& ps, const VehicleParams& p,
                           const ActuatorVector& commands, double dt,
                           const Wrench& extra = {});

}  // namespace h2tail
