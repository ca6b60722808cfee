#include "h2tail/control.hpp"

#include <cmath>
#include <limits>

namespace h2tail {

namespace {

Eigen::Quaterniond quat_from_rotvec(const Eigen::Vector3d& v) {
    double angle = v.norm();
    if (angle < 1e-12) return Eigen::Quaterniond::Identity();
    return Eigen::Quaterniond(Eigen::AngleAxisd(angle, v / angle));
}

}  // namespace

EffectivenessMatrix update_effectiveness(EffectivenessMatrix em,
                                         const std::array<bool, kActuatorCount>& health) {
    em.health = health;
    for (int i = 0; i < kActuatorCount; ++i)
        if (!health[i]) em.g.col(i).setZero();
    return em;
}

int effectiveness_rank(const EffectivenessMatrix& em, double tol) {
    Eigen::Matrix4d gram = em.g * em.g.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram);
    double maxev = es.eigenvalues().maxCoeff();
    if (maxev <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()[i] > tol * maxev) ++rank;
    return rank;
}

namespace {

// weighted min-norm solve on a restricted actuator set; drops axes whose
// gram eigenvalue collapses and flags them
void solve_free(const EffectivenessMatrix& em, const Eigen::Vector4d& nu,
                const std::array<bool, kActuatorCount>& free, AllocationResult& out) {
    Eigen::Matrix<double, 4, kActuatorCount> gw = Eigen::Matrix<double, 4, kActuatorCount>::Zero();
    Eigen::Matrix<double, 4, kActuatorCount> gm = Eigen::Matrix<double, 4, kActuatorCount>::Zero();
    for (int i = 0; i < kActuatorCount; ++i) {
        if (!free[i] || !em.health[i]) continue;
        gw.col(i) = em.g.col(i) / em.weight[i];
        gm.col(i) = em.g.col(i);
    }
    Eigen::Matrix4d gram = gw * gm.transpose();  // g W^-1 g^T over the free set

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(gram);
    const Eigen::Vector4d ev = es.eigenvalues();
    const Eigen::Matrix4d v = es.eigenvectors();
    double maxev = ev.maxCoeff();
    double tol = std::max(maxev, 1.0) * 1e-9;

    Eigen::Vector4d y = Eigen::Vector4d::Zero();
    int rank = 0;
    for (int k = 0; k < 4; ++k) {
        if (ev[k] > tol) {
            y += v.col(k) * (v.col(k).dot(nu) / ev[k]);
            ++rank;
        } else {
            // report the physical axis this direction mostly lives on
            int worst;
            v.col(k).cwiseAbs().maxCoeff(&worst);
            out.axis_degraded[worst] = true;
        }
    }
    out.rank = rank;
    out.delta_u += gw.transpose() * y;
}

}  // namespace

AllocationResult allocate_increment(const EffectivenessMatrix& em, const Eigen::Vector4d& nu,
                                    const ActuatorVector& u_ref) {
    AllocationResult res;
    std::array<bool, kActuatorCount> free;
    free.fill(true);

    solve_free(em, nu, free, res);

    // single redistribution pass: clamp violators, pin them, re-solve the rest
    ActuatorVector u_new = u_ref + res.delta_u;
    bool any_clamped = false;
    Eigen::Vector4d achieved = Eigen::Vector4d::Zero();
    for (int i = 0; i < kActuatorCount; ++i) {
        if (!em.health[i]) continue;
        if (u_new[i] < em.lower[i] - 1e-12 || u_new[i] > em.upper[i] + 1e-12) {
            double clamped = std::clamp(u_new[i], em.lower[i], em.upper[i]);
            res.delta_u[i] = clamped - u_ref[i];
            free[i] = false;
            any_clamped = true;
        }
    }
    if (any_clamped) {
        res.saturated = true;
        for (int i = 0; i < kActuatorCount; ++i)
            if (!free[i]) achieved += em.g.col(i) * res.delta_u[i];
        Eigen::Vector4d residual = nu - achieved;
        AllocationResult second;
        second.axis_degraded = res.axis_degraded;
        solve_free(em, residual, free, second);
        for (int i = 0; i < kActuatorCount; ++i)
            if (free[i]) res.delta_u[i] = second.delta_u[i];
        res.rank = second.rank;
        res.axis_degraded = second.axis_degraded;
        // final clamp; anything still outside stays at its limit
        for (int i = 0; i < kActuatorCount; ++i) {
            if (!em.health[i]) continue;
            double u = u_ref[i] + res.delta_u[i];
            res.delta_u[i] = std::clamp(u, em.lower[i], em.upper[i]) - u_ref[i];
        }
    }
    return res;
}

ActuatorVector indi_inner(const Eigen::Vector3d& angacc_ref, const Eigen::Vector3d& angacc_f,
                          double thrust_increment_n, const ActuatorVector& u_f,
                          const EffectivenessMatrix& em, const Eigen::Vector3d& inertia,
                          AllocationResult* detail) {
    Eigen::Vector4d nu;
    nu.head<3>() = inertia.cwiseProduct(angacc_ref - angacc_f);
    nu[3] = thrust_increment_n;
    AllocationResult res = allocate_increment(em, nu, u_f);
    if (detail) *detail = res;
    ActuatorVector u = u_f + res.delta_u;
    for (int i = 0; i < kActuatorCount; ++i) u[i] = std::clamp(u[i], em.lower[i], em.upper[i]);
    return u;
}

OuterResult indi_outer(const Eigen::Vector3d& acc_ref, const Eigen::Vector3d& acc_f,
                       const Eigen::Quaterniond& att_f, double thrust_f_n, double mass_kg,
                       double max_thrust_n, double gravity, double twist_rad,
                       double tilt_limit_rad) {
    OuterResult out;
    const Eigen::Vector3d g_vec(0, 0, -gravity);
    // current total specific force sets the lever arm for tilt increments
    double f_total = std::max(mass_kg * (acc_f - g_vec).norm(), 0.25 * mass_kg * gravity);

    Eigen::Vector3d df_world = mass_kg * (acc_ref - acc_f);
    Eigen::Vector3d df_body = att_f.conjugate() * df_world;

    out.thrust_increment_n = df_body.x();
    out.thrust_cmd_n = thrust_f_n + out.thrust_increment_n;
    if (out.thrust_cmd_n < 0.0 || out.thrust_cmd_n > max_thrust_n) {
        out.saturated = true;
        out.thrust_cmd_n = std::clamp(out.thrust_cmd_n, 0.0, max_thrust_n);
        out.thrust_increment_n = out.thrust_cmd_n - thrust_f_n;
    }

    double tilt_y = -df_body.z() / f_total;
    double tilt_z = df_body.y() / f_total;
    Eigen::Vector3d rotvec(twist_rad, tilt_y, tilt_z);
    double mag = rotvec.norm();
    if (mag > tilt_limit_rad) rotvec *= tilt_limit_rad / mag;
    out.att_ref = (att_f * quat_from_rotvec(rotvec)).normalized();
    return out;
}

Eigen::Vector3d position_loop(const Eigen::Vector3d& pos_ref, const Eigen::Vector3d& pos,
                              const Eigen::Vector3d& vel_ref, const Eigen::Vector3d& vel,
                              double kp, double kd, const Eigen::Vector3d& acc_ff,
                              const Eigen::Vector3d& acc_limit) {
    Eigen::Vector3d acc = kp * (pos_ref - pos) + kd * (vel_ref - vel) + acc_ff;
    for (int i = 0; i < 3; ++i) acc[i] = std::clamp(acc[i], -acc_limit[i], acc_limit[i]);
    return acc;
}

Eigen::Vector3d attitude_loop(const Eigen::Quaterniond& att_ref, const Eigen::Quaterniond& att,
                              const Eigen::Vector3d& omega, double kq, double kr) {
    Eigen::Quaterniond err = att.conjugate() * att_ref;
    if (err.w() < 0.0) err.coeffs() = -err.coeffs();  // shortest path
    Eigen::Vector3d qv(err.x(), err.y(), err.z());
    return kq * qv - kr * omega;
}

ControllerConfig ControllerConfig::from_config(const KeyValueConfig& cfg) {
    ControllerConfig c;
    c.rate_hz = cfg.get_double("control.rate_hz", c.rate_hz);
    c.cutoff_rollpitch_hz = cfg.get_double("control.cutoff_rollpitch_hz", c.cutoff_rollpitch_hz);
    c.cutoff_yaw_hz = cfg.get_double("control.cutoff_yaw_hz", c.cutoff_yaw_hz);
    c.cutoff_linear_hz = cfg.get_double("control.cutoff_linear_hz", c.cutoff_linear_hz);
    c.cutoff_actuator_hz = cfg.get_double("control.cutoff_actuator_hz", c.cutoff_actuator_hz);
    c.kp_pos = cfg.get_double("control.kp_pos", c.kp_pos);
    c.kd_pos = cfg.get_double("control.kd_pos", c.kd_pos);
    c.kq_att = cfg.get_double("control.kq_att", c.kq_att);
    c.kr_att = cfg.get_double("control.kr_att", c.kr_att);
    if (cfg.has("control.acc_limit")) {
        auto v = cfg.get_doubles("control.acc_limit");
        if (v.size() != 3) throw ConfigError("control.acc_limit needs 3 values");
        c.acc_limit = Eigen::Vector3d(v[0], v[1], v[2]);
    }
    c.tilt_limit_rad = cfg.get_double("control.tilt_limit_rad", c.tilt_limit_rad);
    c.twist_gain = cfg.get_double("control.twist_gain", c.twist_gain);
    c.surface_weight = cfg.get_double("control.surface_weight", c.surface_weight);
    return c;
}

IndiController::IndiController(const VehicleParams& vehicle, const ControllerConfig& cfg)
    : vehicle_(vehicle), cfg_(cfg), dt_(1.0 / cfg.rate_hz) {
    health_.fill(true);
    for (int i = 0; i < 3; ++i) {
        acc_filter_[i].configure(cfg_.cutoff_linear_hz, cfg_.rate_hz);
        double cut = (i < 2) ? cfg_.cutoff_rollpitch_hz : cfg_.cutoff_yaw_hz;
        angacc_filter_[i].configure(cut, cfg_.rate_hz);
    }
    for (auto& f : att_filter_) f.configure(cfg_.cutoff_linear_hz, cfg_.rate_hz);
    for (auto& f : u_filter_) f.configure(cfg_.cutoff_actuator_hz, cfg_.rate_hz);
    thrust_filter_.configure(cfg_.cutoff_actuator_hz, cfg_.rate_hz);
}

void IndiController::prime(const Measurements& meas) {
    for (int i = 0; i < 3; ++i) {
        acc_filter_[i].reset(meas.acceleration[i]);
        angacc_filter_[i].reset(0.0);
    }
    att_filter_[0].reset(meas.attitude.w());
    att_filter_[1].reset(meas.attitude.x());
    att_filter_[2].reset(meas.attitude.y());
    att_filter_[3].reset(meas.attitude.z());
    omega_prev_ = meas.angular_rate;
    if (!u_primed_) prime_actuators(ActuatorVector::Zero());
    primed_ = true;
}

EffectivenessMatrix IndiController::build_effectiveness(const Measurements& meas) const {
    EffectivenessMatrix em;
    em.health = health_;
    em.weight.setOnes();

    // propwash dynamic pressure per wing from the filtered motor commands
    double wash[2] = {0.0, 0.0};
    int nw[2] = {0, 0};
    for (int i = 0; i < kMotorCount; ++i) {
        double t_est = std::clamp(u_filter_[i].value(), 0.0, 1.0) * vehicle_.max_thrust_n;
        wash[vehicle_.motors[i].wing] += t_est;
        nw[vehicle_.motors[i].wing]++;
    }
    for (int w = 0; w < 2; ++w)
        wash[w] = vehicle_.propwash_q_factor * (wash[w] / std::max(nw[w], 1)) /
                  vehicle_.prop_disc_area_m2;
    double q_inf = 0.5 * vehicle_.air_density * meas.airspeed_mps * meas.airspeed_mps;

    for (int i = 0; i < kMotorCount; ++i) {
        const MotorGeom& mg = vehicle_.motors[i];
        double slope = vehicle_.max_thrust_n;  // linear thrust map
        em.g(0, i) = -mg.spin * vehicle_.prop_torque_per_thrust * slope;
        em.g(1, i) = mg.position.z() * slope;
        em.g(2, i) = -mg.position.y() * slope;
        em.g(3, i) = slope;
        em.lower[i] = 0.0;
        em.upper[i] = 1.0;
    }
    for (int i = 0; i < kSurfaceCount; ++i) {
        const SurfaceGeom& sg = vehicle_.surfaces[i];
        int col = kMotorCount + i;
        double q = q_inf + wash[sg.wing];
        double slope = q * sg.area_m2 * sg.force_slope;  // dFz/ddelta magnitude
        em.g(0, col) = -slope * sg.position.y();
        em.g(1, col) = slope * sg.position.x();
        em.g(2, col) = 0.0;
        em.g(3, col) = 0.0;
        em.lower[col] = -vehicle_.surface_limit_rad;
        em.upper[col] = vehicle_.surface_limit_rad;
        em.weight[col] = cfg_.surface_weight;
    }
    for (int i = 0; i < kActuatorCount; ++i)
        if (!health_[i]) em.g.col(i).setZero();
    return em;
}

ActuatorVector IndiController::step(const Measurements& meas, const ControlCommand& cmd) {
    if (!primed_) prime(meas);

    // measured angular acceleration: first difference of the gyro rate
    Eigen::Vector3d angacc_raw = (meas.angular_rate - omega_prev_) / dt_;
    omega_prev_ = meas.angular_rate;

    Eigen::Vector3d acc_f, angacc_f;
    for (int i = 0; i < 3; ++i) {
        acc_f[i] = acc_filter_[i].step(meas.acceleration[i]);
        angacc_f[i] = angacc_filter_[i].step(angacc_raw[i]);
    }
    Eigen::Quaterniond att_f(att_filter_[0].step(meas.attitude.w()),
                             att_filter_[1].step(meas.attitude.x()),
                             att_filter_[2].step(meas.attitude.y()),
                             att_filter_[3].step(meas.attitude.z()));
    att_f.normalize();

    double thrust_est = 0.0;
    for (int i = 0; i < kMotorCount; ++i)
        thrust_est += std::clamp(u_prev_[i], 0.0, 1.0) * vehicle_.max_thrust_n;
    double thrust_f = thrust_filter_.step(thrust_est);

    ActuatorVector u_f;
    for (int i = 0; i < kActuatorCount; ++i) u_f[i] = u_filter_[i].step(u_prev_[i]);

    telem_.acc_f = acc_f;
    telem_.angacc_f = angacc_f;
    telem_.att_f = att_f;
    telem_.thrust_f_n = thrust_f;
    telem_.u_f = u_f;

    ActuatorVector u_cmd = ActuatorVector::Zero();

    if (cmd.mode == ControlCommand::Mode::GroundIdle) {
        telem_.acc_ref.setZero();
        telem_.angacc_ref.setZero();
        telem_.att_ref = meas.attitude;
        telem_.thrust_cmd_n = 0.0;
        telem_.nu.setZero();
        telem_.saturated = false;
        telem_.allocation_rank = 4;
        telem_.attitude_err_rad = 0.0;
    } else {
        Eigen::Quaterniond att_ref;
        double thrust_increment = 0.0;

        if (cmd.mode == ControlCommand::Mode::Position) {
            Eigen::Vector3d acc_ref =
                position_loop(cmd.pos_ref, meas.position, cmd.vel_ref, meas.velocity, cfg_.kp_pos,
                              cfg_.kd_pos, cmd.acc_ff, cfg_.acc_limit);
            telem_.acc_ref = acc_ref;

            // twist about the thrust axis aligning body y with the requested
            // direction; well defined through the whole transition
            Eigen::Vector3d by_w = att_f * Eigen::Vector3d::UnitY();
            Eigen::Vector3d bx_w = att_f * Eigen::Vector3d::UnitX();
            Eigen::Vector3d ydes = cmd.body_y_ref.normalized();
            double twist = cfg_.twist_gain * std::asin(std::clamp(by_w.cross(ydes).dot(bx_w), -1.0, 1.0));

            OuterResult outer =
                indi_outer(acc_ref, acc_f, att_f, thrust_f, vehicle_.mass_kg,
                           vehicle_.max_thrust_n * kMotorCount, vehicle_.gravity, twist,
                           cfg_.tilt_limit_rad);
            att_ref = outer.att_ref;
            thrust_increment = outer.thrust_increment_n;
            telem_.thrust_cmd_n = outer.thrust_cmd_n;
            telem_.saturated = outer.saturated;
        } else {  // DirectAttitude
            att_ref = cmd.att_ref;
            double thrust_target = std::clamp(cmd.collective, 0.0, 1.0) *
                                   vehicle_.max_thrust_n * kMotorCount;
            thrust_increment = thrust_target - thrust_f;
            telem_.acc_ref.setZero();
            telem_.thrust_cmd_n = thrust_target;
            telem_.saturated = false;
        }

        Eigen::Vector3d angacc_ref =
            attitude_loop(att_ref, meas.attitude, meas.angular_rate, cfg_.kq_att, cfg_.kr_att);
        telem_.att_ref = att_ref;
        telem_.angacc_ref = angacc_ref;

        EffectivenessMatrix em = build_effectiveness(meas);
        // forced actuators play no part in the allocation
        for (int i = 0; i < kActuatorCount; ++i)
            if (!std::isnan(cmd.pinned[i])) em.health[i] = false, em.g.col(i).setZero();

        AllocationResult detail;
        u_cmd = indi_inner(angacc_ref, angacc_f, thrust_increment, u_f, em, vehicle_.inertia,
                           &detail);
        telem_.nu.head<3>() = vehicle_.inertia.cwiseProduct(angacc_ref - angacc_f);
        telem_.nu[3] = thrust_increment;
        telem_.saturated = telem_.saturated || detail.saturated;
        telem_.allocation_rank = detail.rank;
        telem_.axis_degraded = detail.axis_degraded;

        Eigen::Quaterniond qe = meas.attitude.conjugate() * att_ref;
        if (qe.w() < 0) qe.coeffs() = -qe.coeffs();
        telem_.attitude_err_rad = 2.0 * std::acos(std::clamp(qe.w(), -1.0, 1.0));
    }

    for (int i = 0; i < kActuatorCount; ++i)
        if (!std::isnan(cmd.pinned[i])) u_cmd[i] = cmd.pinned[i];

    telem_.u_cmd = u_cmd;
    u_prev_ = u_cmd;
    return u_cmd;
}

void IndiController::prime_actuators(const ActuatorVector& u) {
    u_primed_ = true;
    u_prev_ = u;
    for (int i = 0; i < kActuatorCount; ++i) u_filter_[i].reset(u[i]);
    double thrust = 0.0;
    for (int i = 0; i < kMotorCount; ++i)
        thrust += std::clamp(u[i], 0.0, 1.0) * vehicle_.max_thrust_n;
    thrust_filter_.reset(thrust);
}

void IndiController::set_actuator_health(int index, bool healthy) {
    if (index >= 0 && index < kActuatorCount) health_[index] = healthy;
}

}  // namespace h2tail
