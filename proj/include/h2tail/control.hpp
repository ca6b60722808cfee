/*
  Cascaded incremental flight controller.

  Outer loop: measured linear acceleration error becomes a thrust
  increment along the current thrust axis plus a small attitude tilt.
  Inner loop: measured angular acceleration error becomes actuator
  increments through the control effectiveness matrix. All feedback
  signals and the actuator vector run through matching second-order
  Butterworth filters so the increments compare like with like.
*/
#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "h2tail/actuators.hpp"
#include "h2tail/config.hpp"
#include "h2tail/filters.hpp"
#include "h2tail/plant.hpp"

namespace h2tail {

struct EffectivenessMatrix {
    Eigen::Matrix<double, 4, kActuatorCount> g = Eigen::Matrix<double, 4, kActuatorCount>::Zero();
    ActuatorVector weight = ActuatorVector::Ones();
    ActuatorVector lower = ActuatorVector::Zero();
    ActuatorVector upper = ActuatorVector::Ones();
    std::array<bool, kActuatorCount> health;

    EffectivenessMatrix() { health.fill(true); }
};

// zero the columns of failed actuators
EffectivenessMatrix update_effectiveness(EffectivenessMatrix g,
                                         const std::array<bool, kActuatorCount>& health);

int effectiveness_rank(const EffectivenessMatrix& em, double tol = 1e-9);

struct AllocationResult {
    ActuatorVector delta_u = ActuatorVector::Zero();
    bool saturated = false;
    int rank = 4;
    std::array<bool, 4> axis_degraded{false, false, false, false};
};

// weighted minimum-norm solution of g * du = nu with one redistribution
// pass for actuators that hit their limits relative to u_ref
AllocationResult allocate_increment(const EffectivenessMatrix& em, const Eigen::Vector4d& nu,
                                    const ActuatorVector& u_ref);

// inner loop: angular-acceleration error plus a thrust increment -> commands
ActuatorVector indi_inner(const Eigen::Vector3d& angacc_ref, const Eigen::Vector3d& angacc_f,
                          double thrust_increment_n, const ActuatorVector& u_f,
                          const EffectivenessMatrix& em, const Eigen::Vector3d& inertia,
                          AllocationResult* detail = nullptr);

struct OuterResult {
    Eigen::Quaterniond att_ref{1, 0, 0, 0};
    double thrust_increment_n = 0.0;
    double thrust_cmd_n = 0.0;
    bool saturated = false;
};

// outer loop: linear-acceleration error -> attitude reference + thrust
// increment. twist_rad adds a rotation about the thrust axis (heading /
// bank alignment), gravity points along -z world.
OuterResult indi_outer(const Eigen::Vector3d& acc_ref, const Eigen::Vector3d& acc_f,
                       const Eigen::Quaterniond& att_f, double thrust_f_n, double mass_kg,
                       double max_thrust_n, double gravity = 9.81, double twist_rad = 0.0,
                       double tilt_limit_rad = 0.6);

// linear reference loops
Eigen::Vector3d position_loop(const Eigen::Vector3d& pos_ref, const Eigen::Vector3d& pos,
                              const Eigen::Vector3d& vel_ref, const Eigen::Vector3d& vel,
                              double kp, double kd, const Eigen::Vector3d& acc_ff,
                              const Eigen::Vector3d& acc_limit);
Eigen::Vector3d attitude_loop(const Eigen::Quaterniond& att_ref, const Eigen::Quaterniond& att,
                              const Eigen::Vector3d& omega, double kq, double kr);

struct ControllerConfig {
    double rate_hz = 500.0;
    double cutoff_rollpitch_hz = 1.5;
    double cutoff_yaw_hz = 0.5;
    double cutoff_linear_hz = 0.5;
    double cutoff_actuator_hz = 0.5;
    double kp_pos = 1.0;
    double kd_pos = 2.0;
    double kq_att = 50.0;
    double kr_att = 12.0;
    Eigen::Vector3d acc_limit{6.0, 6.0, 4.0};
    double tilt_limit_rad = 0.6;
    double twist_gain = 1.0;
    double surface_weight = 1.0;

    static ControllerConfig from_config(const KeyValueConfig& cfg);
};

// what the mission asks of the controller on a given step
struct ControlCommand {
    enum class Mode { GroundIdle, DirectAttitude, Position };
    Mode mode = Mode::GroundIdle;
    // Position mode
    Eigen::Vector3d pos_ref{0, 0, 0};
    Eigen::Vector3d vel_ref{0, 0, 0};
    Eigen::Vector3d acc_ff{0, 0, 0};
    Eigen::Vector3d body_y_ref{0, 1, 0};  // desired world direction of body y
    // DirectAttitude mode
    Eigen::Quaterniond att_ref{1, 0, 0, 0};
    double collective = 0.0;  // 0..1 of total thrust
    // forced actuator commands (landing pins, thrust cuts); NaN = free
    ActuatorVector pinned = ActuatorVector::Constant(std::numeric_limits<double>::quiet_NaN());
};

struct Measurements {
    Eigen::Vector3d position{0, 0, 0};
    Eigen::Vector3d velocity{0, 0, 0};
    Eigen::Vector3d acceleration{0, 0, 0};  // kinematic, world
    Eigen::Quaterniond attitude{1, 0, 0, 0};
    Eigen::Vector3d angular_rate{0, 0, 0};
    double airspeed_mps = 0.0;
};

struct ControlTelemetry {
    Eigen::Vector3d acc_ref{0, 0, 0}, acc_f{0, 0, 0};
    Eigen::Vector3d angacc_ref{0, 0, 0}, angacc_f{0, 0, 0};
    Eigen::Quaterniond att_ref{1, 0, 0, 0}, att_f{1, 0, 0, 0};
    double thrust_f_n = 0.0, thrust_cmd_n = 0.0;
    Eigen::Vector4d nu = Eigen::Vector4d::Zero();
    ActuatorVector u_cmd = ActuatorVector::Zero();
    ActuatorVector u_f = ActuatorVector::Zero();
    bool saturated = false;
    int allocation_rank = 4;
    std::array<bool, 4> axis_degraded{false, false, false, false};
    double attitude_err_rad = 0.0;
};

class IndiController {
  public:
    IndiController(const VehicleParams& vehicle, const ControllerConfig& cfg);

    ActuatorVector step(const Measurements& meas, const ControlCommand& cmd);

    // seed the actuator-feedback filters from a known applied state, for
    // controllers engaged while the vehicle is already flying
    void prime_actuators(const ActuatorVector& u);

    void set_actuator_health(int index, bool healthy);
    const std::array<bool, kActuatorCount>& actuator_health() const { return health_; }
    const ControlTelemetry& telemetry() const { return telem_; }
    double dt() const { return dt_; }

    // effectiveness built from the current flight condition
    EffectivenessMatrix build_effectiveness(const Measurements& meas) const;

  private:
    VehicleParams vehicle_;
    ControllerConfig cfg_;
    double dt_;
    bool primed_ = false;
    bool u_primed_ = false;

    std::array<Butterworth2, 3> acc_filter_;
    std::array<Butterworth2, 3> angacc_filter_;
    std::array<Butterworth2, 4> att_filter_;
    std::array<Butterworth2, kActuatorCount> u_filter_;
    Butterworth2 thrust_filter_;

    Eigen::Vector3d omega_prev_{0, 0, 0};
    ActuatorVector u_prev_ = ActuatorVector::Zero();
    std::array<bool, kActuatorCount> health_;
    ControlTelemetry telem_;

    void prime(const Measurements& meas);
};

}  // namespace h2tail
