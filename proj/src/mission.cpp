#include "h2tail/mission.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace h2tail {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

Eigen::Vector3d body_y_for_heading(double psi) {
    return {std::sin(psi), -std::cos(psi), 0.0};
}

double smooth01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

const char* phase_name(FlightPhase p) {
    switch (p) {
        case FlightPhase::Ground: return "Ground";
        case FlightPhase::AngledTakeoff: return "AngledTakeoff";
        case FlightPhase::Hover: return "Hover";
        case FlightPhase::TransitionToForward: return "TransitionToForward";
        case FlightPhase::Forward: return "Forward";
        case FlightPhase::TransitionToHover: return "TransitionToHover";
        case FlightPhase::DropDownLanding: return "DropDownLanding";
        case FlightPhase::Shutdown: return "Shutdown";
    }
    return "?";
}

bool phase_edge_allowed(FlightPhase from, FlightPhase to) {
    using P = FlightPhase;
    if (from == to) return true;
    switch (from) {
        case P::Ground: return to == P::AngledTakeoff;
        case P::AngledTakeoff: return to == P::Hover;
        case P::Hover:
            return to == P::TransitionToForward || to == P::DropDownLanding;
        case P::TransitionToForward: return to == P::Forward;
        case P::Forward: return to == P::TransitionToHover;
        case P::TransitionToHover: return to == P::Hover;
        case P::DropDownLanding: return to == P::Shutdown;
        case P::Shutdown: return false;
    }
    return false;
}

MissionRunner::MissionRunner(const VehicleParams& vehicle, const ControllerConfig& control,
                             const Scenario& scenario)
    : vehicle_(vehicle), control_(control), scenario_(scenario) {}

MissionResult MissionRunner::run() {
    MissionResult result;
    MissionSummary& sum = result.summary;
    sum.seed = scenario_.seed;
    sum.final_pressure_bar = scenario_.cylinder.pressure_bar;

    const double dt = 1.0 / control_.rate_hz;
    const int energy_every = std::max(1, static_cast<int>(std::llround(scenario_.energy_dt_s / dt)));
    const int log_every = std::max(1, static_cast<int>(std::llround(scenario_.log_period_s / dt)));

    // course points into the wind when there is any; take-off heading matches
    Eigen::Vector3d course(1, 0, 0);
    if (scenario_.wind_mean.head<2>().norm() > 1.0)
        course = -Eigen::Vector3d(scenario_.wind_mean.x(), scenario_.wind_mean.y(), 0).normalized();
    const double heading = std::atan2(course.y(), course.x());

    // --- assemble the stack ---
    PlantState ps;
    ps.wind = WindModel(scenario_.wind_mean, scenario_.turbulence_sigma, scenario_.seed);
    ps.vehicle.attitude = ground_attitude(vehicle_, heading);
    {
        // rest on the contacts with the static spring compression
        double lowest = min_contact_clearance(ps.vehicle, vehicle_);
        double settle = vehicle_.mass_kg * vehicle_.gravity / (vehicle_.contact_stiffness * 4.0);
        ps.vehicle.position.z() = -lowest - settle;
    }

    IndiController controller(vehicle_, control_);
    bus::CommandBus command_bus(bus::BusTopology{}, scenario_.seed + 1);

    energy::PowerPlantState power;
    power.cylinder = scenario_.cylinder;

    // --- phase bookkeeping ---
    FlightPhase phase = FlightPhase::Ground;
    double phase_enter_t = 0.0;
    sum.phases.push_back({phase, 0.0});
    auto enter_phase = [&](FlightPhase next, double t) {
        phase = next;
        phase_enter_t = t;
        sum.phases.push_back({next, t});
    };

    size_t plan_idx = 0;
    double plan_step_elapsed = 0.0;  // time spent in the step's target phase

    Eigen::Vector3d hover_point{0, 0, scenario_.hover_altitude_m};
    double hover_alt_target = scenario_.hover_altitude_m;
    bool landing_descent = false;
    double touchdown_timer = 0.0;

    Eigen::Quaterniond takeoff_att_from = ps.vehicle.attitude;
    Eigen::Vector3d takeoff_ground_pos = ps.vehicle.position;
    bool airborne_once = false;

    Eigen::Vector3d carrot_pos{0, 0, 0};
    double ramp_speed = 0.0;
    Eigen::Vector3d ramp_dir = course;
    std::array<Eigen::Vector3d, 2> waypoints;
    int wp_index = 0;

    enum class DropStage { Settle, Tip, Cut };
    DropStage drop_stage = DropStage::Settle;
    double cut_collective_start = 0.0;
    double rest_timer = 0.0;

    std::array<int, kActuatorCount> missed_acks{};
    std::vector<int> degraded;

    size_t next_failure = 0;
    double loss_of_control_timer = 0.0;
    double elec_accum = 0.0;
    int elec_samples = 0;
    double bus_voltage = 0.0, fc_power = 0.0, batt_power = 0.0;
    double flight_start = -1.0, flight_end = -1.0;
    bool transition_guard_logged = false;

    uint64_t step_count = 0;
    std::string diagnostic;

    auto mean_soc = [&]() {
        double s = 0.0;
        for (const auto& p : power.bus.packs) s += p.state_of_charge;
        return s / 4.0;
    };

    auto log_row = [&](double t) {
        LogRow row;
        row.t = t;
        row.position = ps.vehicle.position;
        row.velocity = ps.vehicle.velocity;
        row.attitude = ps.vehicle.attitude;
        row.omega = ps.vehicle.angular_rate;
        row.phase = phase;
        row.u = controller.telemetry().u_cmd;
        row.bus_voltage_v = bus_voltage;
        row.fc_power_w = fc_power;
        row.battery_power_w = batt_power;
        row.pressure_bar = power.cylinder.pressure_bar;
        row.soc = mean_soc();
        result.rows.push_back(row);
    };

    bool done = scenario_.plan.empty();
    double t = 0.0;

    while (!done && t < scenario_.max_sim_time_s) {
        // --- scheduled failures ---
        while (next_failure < scenario_.failures.size() &&
               scenario_.failures[next_failure].time_s <= t) {
            const auto& f = scenario_.failures[next_failure];
            bus::FailureSpec spec = bus::parse_failure_spec(f.spec);
            switch (spec.kind) {
                case bus::FailureSpec::Kind::ReverseActuator:
                    ps.motor_reversed[spec.actuator] = true;
                    break;
                case bus::FailureSpec::Kind::KillFuelCell:
                    power.fuel_cell_available = false;
                    break;
                default:
                    bus::inject_failure(command_bus.topology(), spec);
                    break;
            }
            sum.faults_applied.push_back(f.spec);
            ++next_failure;
        }

        // --- plan / phase machine ---
        const PlanStep* step = plan_idx < scenario_.plan.size() ? &scenario_.plan[plan_idx] : nullptr;
        double t_phase = t - phase_enter_t;
        const double alt = ps.vehicle.position.z();
        const double groundspeed = ps.vehicle.velocity.head<2>().norm();
        const double clearance = min_contact_clearance(ps.vehicle, vehicle_);

        if (!step) {
            done = true;  // plan exhausted
            break;
        }

        switch (phase) {
            case FlightPhase::Ground:
                if (step->kind == PlanStep::Kind::Takeoff) {
                    takeoff_att_from = ps.vehicle.attitude;
                    takeoff_ground_pos = ps.vehicle.position;
                    airborne_once = false;
                    if (flight_start < 0) flight_start = t;
                    enter_phase(FlightPhase::AngledTakeoff, t);
                } else {
                    diagnostic = "plan error: first airborne step without takeoff";
                    done = true;
                }
                break;

            case FlightPhase::AngledTakeoff:
                if (!airborne_once && clearance > 0.05) {
                    airborne_once = true;
                    sum.takeoff_slide_m =
                        (ps.vehicle.position - takeoff_ground_pos).head<2>().norm();
                }
                if (alt > takeoff_exit_alt_m) {
                    hover_point = ps.vehicle.position;
                    hover_alt_target = scenario_.hover_altitude_m;
                    landing_descent = false;
                    enter_phase(FlightPhase::Hover, t);
                    if (step->kind == PlanStep::Kind::Takeoff) {
                        ++plan_idx;
                        plan_step_elapsed = 0.0;
                    }
                } else if (t_phase > 12.0) {
                    diagnostic = "takeoff failed to reach exit altitude";
                    done = true;
                }
                break;

            case FlightPhase::Hover:
                switch (step->kind) {
                    case PlanStep::Kind::Hover:
                        plan_step_elapsed += dt;
                        if (plan_step_elapsed >= step->duration_s) {
                            ++plan_idx;
                            plan_step_elapsed = 0.0;
                        }
                        break;
                    case PlanStep::Kind::Cruise:
                    case PlanStep::Kind::CruiseUntilPressure:
                        if (alt < transition_min_alt_m) {
                            // guard: hold hover and climb until high enough
                            hover_alt_target =
                                std::max(hover_alt_target, transition_min_alt_m + 2.0);
                            if (!transition_guard_logged) {
                                transition_guard_logged = true;
                            }
                        } else {
                            ramp_speed = 0.0;
                            ramp_dir = course;
                            carrot_pos = ps.vehicle.position;
                            enter_phase(FlightPhase::TransitionToForward, t);
                        }
                        break;
                    case PlanStep::Kind::Land:
                        landing_descent = true;
                        break;
                    case PlanStep::Kind::Takeoff:
                        ++plan_idx;  // already airborne
                        break;
                }
                if (landing_descent) {
                    hover_alt_target = std::max(hover_alt_target - touchdown_descent_mps * dt, 0.0);
                    bool contact = clearance <= 0.01 && std::fabs(ps.vehicle.velocity.z()) < 0.3;
                    touchdown_timer = contact ? touchdown_timer + dt : 0.0;
                    if (touchdown_timer >= touchdown_hold_s) {
                        drop_stage = DropStage::Settle;
                        rest_timer = 0.0;
                        enter_phase(FlightPhase::DropDownLanding, t);
                    }
                }
                break;

            case FlightPhase::TransitionToForward:
                if (ps.vehicle.velocity.dot(course) > 0.0 &&
                    (ps.vehicle.velocity - ps.wind.current()).norm() >= transition_exit_airspeed_mps) {
                    waypoints[0] = carrot_pos + course * scenario_.leg_length_m;
                    waypoints[1] = carrot_pos;
                    waypoints[0].z() = waypoints[1].z() = scenario_.cruise_altitude_m;
                    wp_index = 0;
                    enter_phase(FlightPhase::Forward, t);
                } else if (t_phase > 25.0) {
                    diagnostic = "transition to forward flight stalled";
                    done = true;
                }
                break;

            case FlightPhase::Forward:
                if (step->kind == PlanStep::Kind::Cruise) {
                    plan_step_elapsed += dt;
                    if (plan_step_elapsed >= step->duration_s) {
                        ++plan_idx;
                        plan_step_elapsed = 0.0;
                    }
                } else if (step->kind == PlanStep::Kind::CruiseUntilPressure) {
                    if (power.cylinder.pressure_bar <= step->pressure_bar) {
                        ++plan_idx;
                        plan_step_elapsed = 0.0;
                    }
                } else {
                    // Land or Hover next: leave cruise
                    ramp_speed = ps.vehicle.velocity.head<2>().norm();
                    ramp_dir = groundspeed > 1.0
                                   ? Eigen::Vector3d(ps.vehicle.velocity.x(), ps.vehicle.velocity.y(), 0)
                                         .normalized()
                                   : course;
                    carrot_pos = ps.vehicle.position;
                    enter_phase(FlightPhase::TransitionToHover, t);
                }
                break;

            case FlightPhase::TransitionToHover:
                if (groundspeed < hover_entry_groundspeed_mps) {
                    hover_point = ps.vehicle.position;
                    hover_alt_target = ps.vehicle.position.z();
                    enter_phase(FlightPhase::Hover, t);
                } else if (t_phase > 30.0) {
                    diagnostic = "transition to hover stalled";
                    done = true;
                }
                break;

            case FlightPhase::DropDownLanding: {
                double tilt_deg = tilt_from_vertical(ps.vehicle.attitude) / kDegToRad;
                if (drop_stage == DropStage::Settle && t_phase > 0.4) {
                    drop_stage = DropStage::Tip;
                } else if (drop_stage == DropStage::Tip && tilt_deg >= slide_threshold_deg) {
                    drop_stage = DropStage::Cut;
                    cut_collective_start = t;
                }
                if (drop_stage == DropStage::Cut) {
                    bool at_rest = ps.vehicle.angular_rate.norm() < 0.05 &&
                                   ps.vehicle.velocity.norm() < 0.05 && clearance < 0.02;
                    rest_timer = at_rest ? rest_timer + dt : 0.0;
                    if (rest_timer >= 0.5 || t - cut_collective_start > 15.0) {
                        enter_phase(FlightPhase::Shutdown, t);
                        flight_end = t;
                        if (step->kind == PlanStep::Kind::Land) ++plan_idx;
                    }
                }
                break;
            }

            case FlightPhase::Shutdown:
                done = true;
                break;
        }
        if (done) break;
        if (plan_idx >= scenario_.plan.size() && phase != FlightPhase::DropDownLanding &&
            phase != FlightPhase::Shutdown) {
            done = true;  // nothing left to do
            break;
        }

        // --- build the control command for this step ---
        ControlCommand cmd;
        t_phase = t - phase_enter_t;
        switch (phase) {
            case FlightPhase::Ground:
            case FlightPhase::Shutdown:
                cmd.mode = ControlCommand::Mode::GroundIdle;
                break;

            case FlightPhase::AngledTakeoff: {
                cmd.mode = ControlCommand::Mode::DirectAttitude;
                double s = smooth01(t_phase / 1.2);
                cmd.att_ref = takeoff_att_from.slerp(s, hover_attitude(heading));
                cmd.collective = takeoff_collective * std::min(t_phase / 0.6, 1.0);
                break;
            }

            case FlightPhase::Hover: {
                cmd.mode = ControlCommand::Mode::Position;
                double dz = hover_alt_target - hover_point.z();
                hover_point.z() += std::clamp(dz, -1.5 * dt, 1.5 * dt);
                cmd.pos_ref = hover_point;
                cmd.vel_ref.setZero();
                cmd.body_y_ref = body_y_for_heading(heading);
                break;
            }

            case FlightPhase::TransitionToForward: {
                cmd.mode = ControlCommand::Mode::Position;
                double accel = 4.0;
                if (ramp_speed < scenario_.cruise_speed_mps) {
                    ramp_speed = std::min(ramp_speed + accel * dt, scenario_.cruise_speed_mps);
                    cmd.acc_ff = ramp_dir * accel * 0.5;
                }
                carrot_pos += ramp_dir * ramp_speed * dt;
                cmd.pos_ref = carrot_pos;
                cmd.vel_ref = ramp_dir * ramp_speed;
                cmd.body_y_ref = body_y_for_heading(heading);
                break;
            }

            case FlightPhase::Forward: {
                cmd.mode = ControlCommand::Mode::Position;
                Eigen::Vector3d to_wp = waypoints[wp_index] - ps.vehicle.position;
                if (to_wp.head<2>().norm() < 50.0) {
                    wp_index = 1 - wp_index;
                    to_wp = waypoints[wp_index] - ps.vehicle.position;
                }
                Eigen::Vector3d dir(to_wp.x(), to_wp.y(), 0);
                dir = dir.norm() > 1e-6 ? dir.normalized() : course;
                cmd.vel_ref = dir * scenario_.cruise_speed_mps;
                cmd.pos_ref = ps.vehicle.position;  // velocity-tracking leg
                double dz = waypoints[wp_index].z() - ps.vehicle.position.z();
                cmd.pos_ref.z() = ps.vehicle.position.z() + std::clamp(dz, -4.0, 4.0);
                cmd.vel_ref.z() = std::clamp(dz * 0.5, -1.5, 1.5);
                cmd.body_y_ref = body_y_for_heading(std::atan2(dir.y(), dir.x()));
                break;
            }

            case FlightPhase::TransitionToHover: {
                cmd.mode = ControlCommand::Mode::Position;
                double decel = 4.0;
                ramp_speed = std::max(0.0, ramp_speed - decel * dt);
                carrot_pos += ramp_dir * ramp_speed * dt;
                cmd.pos_ref = carrot_pos;
                cmd.vel_ref = ramp_dir * ramp_speed;
                cmd.body_y_ref = body_y_for_heading(heading);
                break;
            }

            case FlightPhase::DropDownLanding: {
                cmd.mode = ControlCommand::Mode::DirectAttitude;
                if (drop_stage == DropStage::Settle) {
                    cmd.att_ref = hover_attitude(heading);
                    cmd.collective = 0.28;
                } else if (drop_stage == DropStage::Tip) {
                    double tip = std::min(25.0 * (t - phase_enter_t - 0.4), 60.0);
                    cmd.att_ref = hover_attitude(heading) *
                                  Eigen::Quaterniond(Eigen::AngleAxisd(-tip * kDegToRad,
                                                                       Eigen::Vector3d::UnitY()));
                    cmd.collective = std::max(0.18, 0.28 - 0.05 * (t - phase_enter_t - 0.4));
                    for (int m = 6; m < 12; ++m) cmd.pinned[m] = 0.02;  // rear wing to minimum
                } else {  // Cut: thrust off, nose falls onto the sprung gear
                    cmd.att_ref = ps.vehicle.attitude;
                    cmd.collective = 0.0;
                    for (int i = 0; i < kActuatorCount; ++i) cmd.pinned[i] = 0.0;
                }
                break;
            }
        }

        // --- controller, bus, plant, energy ---
        Measurements meas;
        meas.position = ps.vehicle.position;
        meas.velocity = ps.vehicle.velocity;
        meas.acceleration = ps.vehicle.acceleration;
        meas.attitude = ps.vehicle.attitude;
        meas.angular_rate = ps.vehicle.angular_rate;
        meas.airspeed_mps = (ps.vehicle.velocity - ps.wind.current()).norm();

        ActuatorVector u_cmd = controller.step(meas, cmd);
        command_bus.broadcast(u_cmd, t);

        // actuator health from command acknowledgements
        const auto& acks = command_bus.acks();
        for (int i = 0; i < kActuatorCount; ++i) {
            if (acks[i]) {
                missed_acks[i] = 0;
                controller.set_actuator_health(i, true);
            } else if (++missed_acks[i] >= health_timeout_cycles &&
                       controller.actuator_health()[i]) {
                controller.set_actuator_health(i, false);
                if (std::find(degraded.begin(), degraded.end(), i) == degraded.end())
                    degraded.push_back(i);
            }
        }

        ActuatorVector u_applied = command_bus.node_outputs(t);

        PlantStepOutput pout;
        try {
            pout = plant_step(ps, vehicle_, u_applied, dt);
        } catch (const IntegrationFault& e) {
            diagnostic = e.what();
            break;
        }

        elec_accum += pout.electrical_power_w;
        ++elec_samples;
        ++step_count;
        t = ps.vehicle.time_s;

        if (step_count % energy_every == 0) {
            double load = elec_accum / elec_samples + scenario_.payload_power_w +
                          scenario_.overhead_power_w;
            elec_accum = 0.0;
            elec_samples = 0;
            sum.peak_load_w = std::max(sum.peak_load_w, load);
            try {
                auto pr = energy::powerplant_step(power, load, scenario_.energy_dt_s);
                power = pr.next;
                bus_voltage = pr.bus_voltage_v;
                fc_power = pr.fc_power_w;
                batt_power = pr.battery_power_w;
                sum.max_bus_voltage_v = std::max(sum.max_bus_voltage_v, bus_voltage);
                sum.min_soc = std::min(sum.min_soc, mean_soc());
            } catch (const std::runtime_error& e) {
                diagnostic = e.what();
                break;
            }
        }

        // loss of control: attitude error above 90 degrees for 2 s
        double att_err_deg = controller.telemetry().attitude_err_rad / kDegToRad;
        sum.max_attitude_err_deg = std::max(sum.max_attitude_err_deg, att_err_deg);
        if (phase != FlightPhase::Ground && phase != FlightPhase::Shutdown &&
            phase != FlightPhase::DropDownLanding && att_err_deg > 90.0) {
            loss_of_control_timer += dt;
            if (loss_of_control_timer > 2.0) {
                diagnostic = "loss of control: attitude error above 90 deg for 2 s";
                break;
            }
        } else {
            loss_of_control_timer = 0.0;
        }
        // crash: ground contact in a phase that should never touch it
        if ((phase == FlightPhase::TransitionToForward || phase == FlightPhase::Forward ||
             phase == FlightPhase::TransitionToHover) &&
            min_contact_clearance(ps.vehicle, vehicle_) < 0.0) {
            diagnostic = "ground collision in forward flight";
            break;
        }

        if (step_count % log_every == 0) log_row(t);
    }

    if (t >= scenario_.max_sim_time_s && diagnostic.empty() && !done)
        diagnostic = "max simulation time exceeded";

    sum.sim_time_s = ps.vehicle.time_s;
    if (flight_start >= 0)
        sum.flight_time_s = (flight_end >= 0 ? flight_end : ps.vehicle.time_s) - flight_start;
    sum.h2_consumed_g = power.h2_consumed_g;
    sum.final_pressure_bar = power.cylinder.pressure_bar;
    sum.fc_energy_wh = power.fc_energy_wh;
    sum.battery_energy_out_wh = power.battery_energy_out_wh;
    sum.final_soc = mean_soc();
    sum.final_aux_wh = power.aux_energy_wh;
    sum.frames_broadcast = command_bus.stats().frames_broadcast;
    for (int i = 0; i < kActuatorCount; ++i) {
        if (command_bus.topology().node_alive[i + 1])
            sum.commands_lost += command_bus.stats().missed[i];
    }
    sum.degraded_actuators = degraded;
    sum.completed = diagnostic.empty();
    sum.termination = diagnostic.empty() ? "completed" : diagnostic;
    if (result.rows.empty() || result.rows.back().t < ps.vehicle.time_s - 1e-9) {
        if (step_count > 0) log_row(ps.vehicle.time_s);
    }
    return result;
}

double endurance_estimate(double usable_h2_g, double mean_power_w, double efficiency) {
    if (mean_power_w <= 0.0) throw std::domain_error("endurance_estimate: nonpositive power");
    return usable_h2_g / energy::fuel_flow(mean_power_w, efficiency);
}

double endurance_estimate(const energy::HydrogenCylinder& cylinder, double mean_power_w,
                          double efficiency) {
    energy::HydrogenCylinder floor = cylinder;
    floor.pressure_bar = cylinder.min_usable_pressure_bar;
    double usable = energy::hydrogen_mass(cylinder) - energy::hydrogen_mass(floor);
    return endurance_estimate(std::max(usable, 0.0), mean_power_w, efficiency);
}

std::string summary_to_json(const MissionSummary& s) {
    nlohmann::json j;
    j["termination"] = s.termination;
    j["completed"] = s.completed;
    j["sim_time_s"] = s.sim_time_s;
    j["flight_time_s"] = s.flight_time_s;
    j["h2_consumed_g"] = s.h2_consumed_g;
    j["final_pressure_bar"] = s.final_pressure_bar;
    j["fc_energy_wh"] = s.fc_energy_wh;
    j["battery_energy_out_wh"] = s.battery_energy_out_wh;
    j["min_soc"] = s.min_soc;
    j["final_soc"] = s.final_soc;
    j["final_aux_wh"] = s.final_aux_wh;
    j["peak_load_w"] = s.peak_load_w;
    j["max_attitude_err_deg"] = s.max_attitude_err_deg;
    j["max_bus_voltage_v"] = s.max_bus_voltage_v;
    j["takeoff_slide_m"] = s.takeoff_slide_m;
    j["frames_broadcast"] = s.frames_broadcast;
    j["commands_lost"] = s.commands_lost;
    j["seed"] = s.seed;
    j["faults_applied"] = s.faults_applied;
    j["degraded_actuators"] = s.degraded_actuators;
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : s.phases)
        phases.push_back({{"phase", phase_name(p.phase)}, {"t_s", p.t_enter_s}});
    j["phases"] = phases;
    return j.dump(2) + "\n";
}

void write_mission_outputs(const MissionResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream csv(fs::path(out_dir) / "timeseries.csv");
    csv << "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,phase";
    for (int i = 0; i < kMotorCount; ++i) csv << ",m" << i;
    for (int i = 0; i < kSurfaceCount; ++i) csv << ",s" << i;
    csv << ",bus_voltage,fc_power,battery_power,pressure_bar,soc\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        csv << ',' << buf;
    };
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "%.10g", r.t);
        csv << buf;
        put(r.position.x());
        put(r.position.y());
        put(r.position.z());
        put(r.velocity.x());
        put(r.velocity.y());
        put(r.velocity.z());
        put(r.attitude.w());
        put(r.attitude.x());
        put(r.attitude.y());
        put(r.attitude.z());
        put(r.omega.x());
        put(r.omega.y());
        put(r.omega.z());
        csv << ',' << phase_name(r.phase);
        for (int i = 0; i < kActuatorCount; ++i) put(r.u[i]);
        put(r.bus_voltage_v);
        put(r.fc_power_w);
        put(r.battery_power_w);
        put(r.pressure_bar);
        put(r.soc);
        csv << '\n';
    }

    std::ofstream phases(fs::path(out_dir) / "phases.csv");
    phases << "phase,t_enter_s\n";
    for (const auto& p : result.summary.phases) {
        std::snprintf(buf, sizeof buf, "%.10g", p.t_enter_s);
        phases << phase_name(p.phase) << ',' << buf << '\n';
    }

    std::ofstream sj(fs::path(out_dir) / "summary.json");
    sj << summary_to_json(result.summary);
}

std::vector<FaultCaseResult> run_fault_campaign(const VehicleParams& vehicle,
                                                const ControllerConfig& control,
                                                const Scenario& base, bool parallel) {
    std::vector<std::string> specs;
    specs.push_back("");  // baseline
    const char* buses[2] = {"A", "B"};
    for (int b = 0; b < 2; ++b) {
        specs.push_back(std::string("cut:") + buses[b] + ":fc");
        for (int n = 1; n <= kActuatorCount; ++n)
            specs.push_back(std::string("cut:") + buses[b] + ":node" + std::to_string(n));
    }
    for (int n = 1; n <= kActuatorCount; ++n)
        specs.push_back("kill:node" + std::to_string(n));

    auto run_case = [&](const std::string& spec) {
        Scenario sc = base;
        if (!spec.empty()) sc.failures.push_back({1.0, spec});
        std::stable_sort(sc.failures.begin(), sc.failures.end(),
                         [](const TimedFailure& a, const TimedFailure& b) {
                             return a.time_s < b.time_s;
                         });
        MissionRunner runner(vehicle, control, sc);
        MissionResult res = runner.run();
        FaultCaseResult fr;
        fr.spec = spec;
        fr.termination = res.summary.termination;
        fr.flight_time_s = res.summary.flight_time_s;
        fr.commands_lost = res.summary.commands_lost;
        fr.mission_maintained = res.summary.completed;
        return fr;
    };

    std::vector<FaultCaseResult> results(specs.size());
    if (parallel) {
        unsigned workers = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::future<void>> futures;
        std::atomic<size_t> cursor{0};
        for (unsigned w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&]() {
                while (true) {
                    size_t i = cursor.fetch_add(1);
                    if (i >= specs.size()) return;
                    results[i] = run_case(specs[i]);
                }
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (size_t i = 0; i < specs.size(); ++i) results[i] = run_case(specs[i]);
    }
    return results;
}

}  // namespace h2tail
