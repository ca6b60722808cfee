#include "h2tail/plant.hpp"

#include <algorithm>
#include <cmath>

namespace h2tail {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

Eigen::Quaterniond quat_exp(const Eigen::Vector3d& rotvec) {
    double angle = rotvec.norm();
    if (angle < 1e-12) return Eigen::Quaterniond(1, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z()).normalized();
    return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle));
}

}  // namespace

double lift_coefficient(double alpha_rad, const AeroModel& m) {
    const double ad = alpha_rad / kDegToRad;
    const double aa = std::fabs(ad);
    const double stall = m.alpha_stall_deg;
    auto linear = [&](double a) { return m.cl0 + m.cl_alpha * a; };

    if (aa <= stall) return linear(alpha_rad);

    // gentle plateau past stall, anchored at the linear value at stall onset
    const double side = ad > 0.0 ? 1.0 : -1.0;
    const double anchor = linear(side * stall * kDegToRad);
    const double plateau = anchor * std::max(0.0, 1.0 - m.post_stall_decay_per_deg * (aa - stall));
    const double plate = std::sin(2.0 * alpha_rad);  // flat plate 2 sin a cos a

    if (aa < stall + m.stall_blend_deg) {
        double h = smoothstep((aa - stall) / m.stall_blend_deg);
        return (1.0 - h) * linear(alpha_rad) + h * plateau;
    }
    if (aa <= m.far_blend_start_deg) return plateau;
    if (aa < m.far_blend_end_deg) {
        double h = smoothstep((aa - m.far_blend_start_deg) /
                              (m.far_blend_end_deg - m.far_blend_start_deg));
        return (1.0 - h) * plateau + h * plate;
    }
    return plate;
}

double drag_coefficient(double alpha_rad, const AeroModel& m) {
    const double aa = std::fabs(alpha_rad) / kDegToRad;
    const double cl = lift_coefficient(alpha_rad, m);
    double h = smoothstep((aa - m.plate_drag_onset_deg) /
                          (m.plate_drag_full_deg - m.plate_drag_onset_deg));
    double s = std::sin(alpha_rad);
    return m.cd0 + m.induced_k * cl * cl + h * m.plate_cd * s * s;
}

VehicleParams::VehicleParams() {
    // 3 motors per half-wing; spins alternate so reaction torque cancels
    const double fx = 0.45, fz = 0.08, bx = -0.45, bz = -0.08;
    const double fy[3] = {0.25, 0.50, 0.75};
    const double by[3] = {0.30, 0.60, 0.90};
    // front wing, left tip inward then right: motor ids 0..5
    motors[0] = {{fx, -fy[2], fz}, +1.0, 0};
    motors[1] = {{fx, -fy[1], fz}, -1.0, 0};
    motors[2] = {{fx, -fy[0], fz}, +1.0, 0};
    motors[3] = {{fx, +fy[0], fz}, -1.0, 0};
    motors[4] = {{fx, +fy[1], fz}, +1.0, 0};
    motors[5] = {{fx, +fy[2], fz}, -1.0, 0};
    // back wing: motor ids 6..11
    motors[6] = {{bx, -by[2], bz}, -1.0, 1};
    motors[7] = {{bx, -by[1], bz}, +1.0, 1};
    motors[8] = {{bx, -by[0], bz}, -1.0, 1};
    motors[9] = {{bx, +by[0], bz}, +1.0, 1};
    motors[10] = {{bx, +by[1], bz}, -1.0, 1};
    motors[11] = {{bx, +by[2], bz}, +1.0, 1};

    surfaces[0] = {{0.42, -0.50, 0.08}, 0.035, 2.0, 0};   // front left elevon
    surfaces[1] = {{0.42, +0.50, 0.08}, 0.035, 2.0, 0};   // front right
    surfaces[2] = {{-0.48, -0.60, -0.08}, 0.035, 2.0, 1};  // back left
    surfaces[3] = {{-0.48, +0.60, -0.08}, 0.035, 2.0, 1};  // back right

    // tail stand quad (touchdown stance) and the sprung nose gear pair;
    // gear length puts the unpowered rest attitude at ground_pitch_deg
    contact_points = {
        {-0.50, -0.28, 0.00}, {-0.50, 0.28, 0.00},    // stand, belly edge
        {-0.50, -0.28, -0.12}, {-0.50, 0.28, -0.12},  // stand, top edge
        {0.40, -0.25, 0.631}, {0.40, 0.25, 0.631},    // nose gear feet
    };
}

Eigen::Quaterniond hover_attitude(double heading_rad) {
    // nose up, belly toward the course direction
    return Eigen::Quaterniond(Eigen::AngleAxisd(heading_rad + M_PI, Eigen::Vector3d::UnitZ())) *
           Eigen::Quaterniond(Eigen::AngleAxisd(-M_PI / 2.0, Eigen::Vector3d::UnitY()));
}

Eigen::Quaterniond ground_attitude(const VehicleParams& p, double heading_rad) {
    return hover_attitude(heading_rad) *
           Eigen::Quaterniond(Eigen::AngleAxisd(p.ground_pitch_deg * kDegToRad, Eigen::Vector3d::UnitY()));
}

double tilt_from_vertical(const Eigen::Quaterniond& att) {
    Eigen::Vector3d bx = att * Eigen::Vector3d::UnitX();
    return std::acos(std::clamp(bx.z(), -1.0, 1.0));
}

WindModel::WindModel(const Eigen::Vector3d& mean, double sigma, uint64_t seed, double tau_s)
    : mean_(mean), sigma_(sigma), tau_s_(tau_s) {
    rng_state_ = seed * 0x9e3779b97f4a7c15ull + 0xbf58476d1ce4e5b9ull;
    // warm the generator
    for (int i = 0; i < 8; ++i) normal_sample();
}

double WindModel::normal_sample() {
    // splitmix64 driving a Box-Muller pair member; library-independent
    auto next = [this]() {
        rng_state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = rng_state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    double u1 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::Vector3d WindModel::step(double dt) {
    if (sigma_ > 0.0) {
        double decay = std::exp(-dt / tau_s_);
        double excite = sigma_ * std::sqrt(1.0 - decay * decay);
        for (int i = 0; i < 3; ++i) gust_[i] = gust_[i] * decay + excite * normal_sample();
    }
    return mean_ + gust_;
}

Wrench aero_wrench(const VehicleState& state, const Eigen::Vector3d& wind_world,
                   const std::array<double, kSurfaceCount>& surface_defl,
                   const VehicleParams& p,
                   const std::array<double, kSurfaceCount>& extra_surface_q) {
    Wrench w;
    const Eigen::Matrix3d r = state.attitude.toRotationMatrix();
    const Eigen::Vector3d v_body = r.transpose() * (state.velocity - wind_world);
    const Eigen::Vector3d& omega = state.angular_rate;
    const double rho = p.air_density;

    struct WingDef {
        double area;
        Eigen::Vector3d pos;
        bool back;
    };
    const WingDef wings[2] = {{p.wing_area_front_m2, p.wing_pos_front, false},
                              {p.wing_area_back_m2, p.wing_pos_back, true}};

    double q_wing[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        const WingDef& wg = wings[i];
        Eigen::Vector3d v_loc = v_body + omega.cross(wg.pos);
        double u = v_loc.x(), wz = v_loc.z();
        double v2 = u * u + wz * wz;
        double q = 0.5 * rho * v2;
        if (wg.back) {
            // wake of the front wing reduces the back wing's effective q
            // in forward flight; no effect in hover
            double fwd = std::clamp(u / 10.0, 0.0, 1.0);
            q *= 1.0 - (1.0 - p.downwash_factor) * fwd;
        }
        q_wing[i] = q;
        if (v2 < 1e-9) continue;
        double vmag = std::sqrt(v2);
        double alpha = std::atan2(wz, u);
        double cl = lift_coefficient(alpha, p.aero);
        double cd = drag_coefficient(alpha, p.aero);
        Eigen::Vector3d flow_dir(u / vmag, 0.0, wz / vmag);
        Eigen::Vector3d lift_dir(wz / vmag, 0.0, -u / vmag);
        Eigen::Vector3d f = q * wg.area * (cl * lift_dir - cd * flow_dir);
        w.force += f;
        w.moment += wg.pos.cross(f);
    }

    // elevons: local freestream q of their wing plus propwash
    for (int i = 0; i < kSurfaceCount; ++i) {
        const SurfaceGeom& sg = p.surfaces[i];
        double q = q_wing[sg.wing] + extra_surface_q[i];
        Eigen::Vector3d f(0.0, 0.0, -q * sg.area_m2 * sg.force_slope * surface_defl[i]);
        w.force += f;
        w.moment += sg.position.cross(f);
    }

    // fuselage side force and rotational damping
    double vy = v_body.y();
    w.force.y() += -0.5 * rho * p.side_cd * p.side_area_m2 * std::fabs(vy) * vy;
    w.moment -= p.rot_damping.cwiseProduct(omega);
    return w;
}

double motor_electrical_power(double thrust_n, double axial_speed_mps, const VehicleParams& p) {
    if (thrust_n <= 1e-9) return 0.0;
    double v = std::max(axial_speed_mps, 0.0);
    double disc = thrust_n / (2.0 * p.air_density * p.prop_disc_area_m2);
    double vi = 0.5 * v + std::sqrt(0.25 * v * v + disc);
    return thrust_n * vi / p.elec_efficiency;
}

double min_contact_clearance(const VehicleState& state, const VehicleParams& p) {
    double lowest = 1e30;
    const Eigen::Matrix3d r = state.attitude.toRotationMatrix();
    for (const auto& c : p.contact_points)
        lowest = std::min(lowest, (state.position + r * c).z());
    return lowest;
}

void step_dynamics(VehicleState& s, const VehicleParams& p, const Wrench& ext, double dt) {
    const Eigen::Matrix3d r = s.attitude.toRotationMatrix();
    Eigen::Vector3d force_world = r * ext.force;
    force_world.z() -= p.mass_kg * p.gravity;
    Eigen::Vector3d moment_body = ext.moment;

    // penalty ground contact with regularized Coulomb friction
    const Eigen::Vector3d omega_world = r * s.angular_rate;
    for (const auto& c : p.contact_points) {
        Eigen::Vector3d arm_world = r * c;
        Eigen::Vector3d pw = s.position + arm_world;
        if (pw.z() >= 0.0) continue;
        Eigen::Vector3d vp = s.velocity + omega_world.cross(arm_world);
        double normal = p.contact_stiffness * (-pw.z()) + p.contact_damping * (-vp.z());
        if (normal <= 0.0) continue;
        Eigen::Vector3d vt(vp.x(), vp.y(), 0.0);
        double vmag = vt.norm();
        double mu = vmag < p.friction_speed_eps ? p.friction_static : p.friction_kinetic;
        Eigen::Vector3d fc(0.0, 0.0, normal);
        if (vmag > 1e-9) fc -= mu * normal * vt / std::max(vmag, p.friction_speed_eps);
        force_world += fc;
        moment_body += c.cross(r.transpose() * fc);
    }

    Eigen::Vector3d accel = force_world / p.mass_kg;
    s.velocity += accel * dt;
    s.position += s.velocity * dt;

    // midpoint for the gyroscopic term keeps tumbling energy drift small
    const Eigen::Vector3d inv_i = p.inertia.cwiseInverse();
    auto omega_dot = [&](const Eigen::Vector3d& om) -> Eigen::Vector3d {
        return inv_i.cwiseProduct(moment_body - om.cross(p.inertia.cwiseProduct(om)));
    };
    Eigen::Vector3d om_mid = s.angular_rate + 0.5 * dt * omega_dot(s.angular_rate);
    s.angular_rate += dt * omega_dot(om_mid);
    s.attitude = (s.attitude * quat_exp(om_mid * dt)).normalized();

    s.acceleration = accel;
    s.time_s += dt;

    if (!s.position.allFinite() || !s.velocity.allFinite() || !s.angular_rate.allFinite() ||
        !std::isfinite(s.attitude.w()))
        throw IntegrationFault("step_dynamics: state is no longer finite at t=" +
                               std::to_string(s.time_s));
}

PlantStepOutput plant_step(PlantState& ps, const VehicleParams& p, const ActuatorVector& commands,
                           double dt, const Wrench& extra) {
    PlantStepOutput out;

    for (int i = 0; i < kSurfaceCount; ++i) {
        double target = std::clamp(commands[kMotorCount + i], -p.surface_limit_rad, p.surface_limit_rad);
        double max_step = p.servo_rate_rad_s * dt;
        ps.surface_defl[i] += std::clamp(target - ps.surface_defl[i], -max_step, max_step);
    }

    const double lag = std::exp(-dt / p.motor_tau_s);
    for (int i = 0; i < kMotorCount; ++i) {
        double target = std::clamp(commands[i], 0.0, 1.0) * p.max_thrust_n;
        ps.motor_thrust[i] = target + (ps.motor_thrust[i] - target) * lag;
    }

    out.wind_world = ps.wind.step(dt);

    VehicleState& s = ps.vehicle;
    const Eigen::Matrix3d r = s.attitude.toRotationMatrix();
    const Eigen::Vector3d v_body = r.transpose() * (s.velocity - out.wind_world);
    out.airspeed_mps = v_body.norm();

    // propwash dynamic pressure over the elevons, per wing
    double wash_q[2] = {0.0, 0.0};
    int wing_motors[2] = {0, 0};
    for (int i = 0; i < kMotorCount; ++i) {
        wash_q[p.motors[i].wing] += std::fabs(ps.motor_thrust[i]);
        wing_motors[p.motors[i].wing]++;
    }
    for (int wgi = 0; wgi < 2; ++wgi)
        wash_q[wgi] = p.propwash_q_factor * (wash_q[wgi] / std::max(wing_motors[wgi], 1)) /
                      p.prop_disc_area_m2;
    std::array<double, kSurfaceCount> extra_q{};
    for (int i = 0; i < kSurfaceCount; ++i) extra_q[i] = wash_q[p.surfaces[i].wing];

    Wrench total = aero_wrench(s, out.wind_world, ps.surface_defl, p, extra_q);
    total.force += extra.force;
    total.moment += extra.moment;

    double thrust_sum_abs = 0.0;
    for (int i = 0; i < kMotorCount; ++i) {
        double t = ps.motor_thrust[i] * (ps.motor_reversed[i] ? -1.0 : 1.0);
        const MotorGeom& mg = p.motors[i];
        total.force.x() += t;
        total.moment += mg.position.cross(Eigen::Vector3d(t, 0, 0));
        total.moment.x() += -mg.spin * p.prop_torque_per_thrust * t;
        thrust_sum_abs += std::fabs(t);
        out.electrical_power_w += motor_electrical_power(std::fabs(t), v_body.x(), p) +
                                  p.motor_idle_power_w * std::clamp(commands[i], 0.0, 1.0);
    }

    // propwash over the wing squeezed against the ground lifts the vehicle a
    // little below propwash_lift_alt; uncalibrated, configurable
    double alt = s.position.z();
    if (alt < p.propwash_lift_alt_m && p.propwash_lift_factor > 0.0) {
        double bonus = p.propwash_lift_factor * thrust_sum_abs *
                       (1.0 - std::max(alt, 0.0) / p.propwash_lift_alt_m);
        total.force += r.transpose() * Eigen::Vector3d(0, 0, bonus);
    }

    step_dynamics(s, p, total, dt);
    return out;
}

VehicleParams VehicleParams::from_config(const KeyValueConfig& cfg) {
    VehicleParams p;
    p.mass_kg = cfg.get_double("plant.mass_kg", p.mass_kg);
    if (cfg.has("plant.inertia")) {
        auto v = cfg.get_doubles("plant.inertia");
        if (v.size() != 3) throw ConfigError("plant.inertia needs 3 values");
        p.inertia = Eigen::Vector3d(v[0], v[1], v[2]);
    }
    p.gravity = cfg.get_double("plant.gravity", p.gravity);
    p.air_density = cfg.get_double("plant.air_density", p.air_density);
    p.wing_area_front_m2 = cfg.get_double("plant.wing_area_front_m2", p.wing_area_front_m2);
    p.wing_area_back_m2 = cfg.get_double("plant.wing_area_back_m2", p.wing_area_back_m2);
    auto read_vec3 = [&](const char* key, Eigen::Vector3d& dst) {
        if (!cfg.has(key)) return;
        auto v = cfg.get_doubles(key);
        if (v.size() != 3) throw ConfigError(std::string(key) + " needs 3 values");
        dst = Eigen::Vector3d(v[0], v[1], v[2]);
    };
    read_vec3("plant.wing_pos_front", p.wing_pos_front);
    read_vec3("plant.wing_pos_back", p.wing_pos_back);
    p.downwash_factor = cfg.get_double("plant.downwash_factor", p.downwash_factor);
    p.side_area_m2 = cfg.get_double("plant.side_area_m2", p.side_area_m2);
    p.side_cd = cfg.get_double("plant.side_cd", p.side_cd);
    read_vec3("plant.rot_damping", p.rot_damping);

    AeroModel& a = p.aero;
    a.cl0 = cfg.get_double("aero.cl0", a.cl0);
    a.cl_alpha = cfg.get_double("aero.cl_alpha", a.cl_alpha);
    a.alpha_stall_deg = cfg.get_double("aero.alpha_stall_deg", a.alpha_stall_deg);
    a.stall_blend_deg = cfg.get_double("aero.stall_blend_deg", a.stall_blend_deg);
    a.post_stall_decay_per_deg = cfg.get_double("aero.post_stall_decay_per_deg", a.post_stall_decay_per_deg);
    a.far_blend_start_deg = cfg.get_double("aero.far_blend_start_deg", a.far_blend_start_deg);
    a.far_blend_end_deg = cfg.get_double("aero.far_blend_end_deg", a.far_blend_end_deg);
    a.cd0 = cfg.get_double("aero.cd0", a.cd0);
    a.induced_k = cfg.get_double("aero.induced_k", a.induced_k);
    a.plate_cd = cfg.get_double("aero.plate_cd", a.plate_cd);
    a.plate_drag_onset_deg = cfg.get_double("aero.plate_drag_onset_deg", a.plate_drag_onset_deg);
    a.plate_drag_full_deg = cfg.get_double("aero.plate_drag_full_deg", a.plate_drag_full_deg);

    for (int i = 0; i < kMotorCount; ++i) {
        std::string key = "motors.motor_" + std::to_string(i);
        if (!cfg.has(key)) continue;
        auto v = cfg.get_doubles(key);
        if (v.size() != 5) throw ConfigError(key + " needs `x y z spin wing`");
        p.motors[i] = {{v[0], v[1], v[2]}, v[3], static_cast<int>(v[4])};
    }
    p.max_thrust_n = cfg.get_double("motors.max_thrust_n", p.max_thrust_n);
    p.motor_tau_s = cfg.get_double("motors.tau_s", p.motor_tau_s);
    p.prop_disc_area_m2 = cfg.get_double("motors.prop_disc_area_m2", p.prop_disc_area_m2);
    p.prop_torque_per_thrust = cfg.get_double("motors.prop_torque_per_thrust", p.prop_torque_per_thrust);
    p.elec_efficiency = cfg.get_double("motors.elec_efficiency", p.elec_efficiency);
    p.motor_idle_power_w = cfg.get_double("motors.idle_power_w", p.motor_idle_power_w);

    for (int i = 0; i < kSurfaceCount; ++i) {
        std::string key = "surfaces.surface_" + std::to_string(i);
        if (!cfg.has(key)) continue;
        auto v = cfg.get_doubles(key);
        if (v.size() != 6) throw ConfigError(key + " needs `x y z area slope wing`");
        p.surfaces[i] = {{v[0], v[1], v[2]}, v[3], v[4], static_cast<int>(v[5])};
    }
    p.surface_limit_rad = cfg.get_double("surfaces.limit_rad", p.surface_limit_rad);
    p.servo_rate_rad_s = cfg.get_double("surfaces.servo_rate_rad_s", p.servo_rate_rad_s);
    p.propwash_q_factor = cfg.get_double("surfaces.propwash_q_factor", p.propwash_q_factor);

    p.ground_pitch_deg = cfg.get_double("ground.pitch_deg", p.ground_pitch_deg);
    auto contact_keys = cfg.keys_with_prefix("ground.contact_");
    if (!contact_keys.empty()) {
        p.contact_points.clear();
        for (const auto& key : contact_keys) {
            auto v = cfg.get_doubles(key);
            if (v.size() != 3) throw ConfigError(key + " needs 3 values");
            p.contact_points.emplace_back(v[0], v[1], v[2]);
        }
    }
    p.contact_stiffness = cfg.get_double("ground.stiffness", p.contact_stiffness);
    p.contact_damping = cfg.get_double("ground.damping", p.contact_damping);
    p.friction_static = cfg.get_double("ground.friction_static", p.friction_static);
    p.friction_kinetic = cfg.get_double("ground.friction_kinetic", p.friction_kinetic);
    p.friction_speed_eps = cfg.get_double("ground.friction_speed_eps", p.friction_speed_eps);
    p.propwash_lift_factor = cfg.get_double("ground.propwash_lift_factor", p.propwash_lift_factor);
    p.propwash_lift_alt_m = cfg.get_double("ground.propwash_lift_alt_m", p.propwash_lift_alt_m);

    if (p.mass_kg <= 0.0) throw ConfigError("plant.mass_kg must be positive");
    if (p.inertia.minCoeff() <= 0.0) throw ConfigError("plant.inertia must be positive definite");
    if (p.ground_pitch_deg < -60.0 || p.ground_pitch_deg > -55.0)
        throw ConfigError("ground.pitch_deg must lie in [-60, -55]");
    return p;
}

}  // namespace h2tail
