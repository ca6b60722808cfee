/*
  Flight-phase state machine and scenario runner: wires the plant,
  controller, command bus and powertrain into one deterministic
  simulation and produces the mission log and summary.
*/
#pragma once

#include <string>
#include <vector>

#include "h2tail/bus.hpp"
#include "h2tail/control.hpp"
#include "h2tail/energy.hpp"
#include "h2tail/plant.hpp"
#include "h2tail/scenario.hpp"

namespace h2tail {

enum class FlightPhase {
    Ground,
    AngledTakeoff,
    Hover,
    TransitionToForward,
    Forward,
    TransitionToHover,
    DropDownLanding,
    Shutdown,
};

const char* phase_name(FlightPhase p);

// the legal phase graph; used by the runner and by log validation
bool phase_edge_allowed(FlightPhase from, FlightPhase to);

struct PhaseRecord {
    FlightPhase phase = FlightPhase::Ground;
    double t_enter_s = 0.0;
};

struct LogRow {
    double t = 0.0;
    Eigen::Vector3d position{0, 0, 0};
    Eigen::Vector3d velocity{0, 0, 0};
    Eigen::Quaterniond attitude{1, 0, 0, 0};
    Eigen::Vector3d omega{0, 0, 0};
    FlightPhase phase = FlightPhase::Ground;
    ActuatorVector u = ActuatorVector::Zero();
    double bus_voltage_v = 0.0;
    double fc_power_w = 0.0;
    double battery_power_w = 0.0;
    double pressure_bar = 0.0;
    double soc = 1.0;
};

struct MissionSummary {
    std::string termination = "completed";  // or a diagnostic message
    bool completed = false;
    double sim_time_s = 0.0;
    double flight_time_s = 0.0;  // takeoff start to shutdown
    double h2_consumed_g = 0.0;
    double final_pressure_bar = 0.0;
    double fc_energy_wh = 0.0;
    double battery_energy_out_wh = 0.0;
    double min_soc = 1.0;
    double final_soc = 1.0;
    double final_aux_wh = 0.0;
    double peak_load_w = 0.0;
    double max_attitude_err_deg = 0.0;
    double max_bus_voltage_v = 0.0;
    double takeoff_slide_m = 0.0;
    uint64_t frames_broadcast = 0;
    uint64_t commands_lost = 0;  // live reachable nodes that missed a broadcast
    std::vector<PhaseRecord> phases;
    std::vector<std::string> faults_applied;
    std::vector<int> degraded_actuators;
    uint64_t seed = 0;
};

struct MissionResult {
    MissionSummary summary;
    std::vector<LogRow> rows;
};

class MissionRunner {
  public:
    MissionRunner(const VehicleParams& vehicle, const ControllerConfig& control,
                  const Scenario& scenario);

    MissionResult run();

    // thresholds, overridable before run()
    double takeoff_exit_alt_m = 2.0;
    double transition_min_alt_m = 10.0;
    double transition_exit_airspeed_mps = 16.0;
    double hover_entry_groundspeed_mps = 2.5;
    double touchdown_descent_mps = 0.5;
    double touchdown_hold_s = 0.5;
    double slide_threshold_deg = 35.0;
    double takeoff_collective = 0.75;
    int health_timeout_cycles = 3;

  private:
    VehicleParams vehicle_;
    ControllerConfig control_;
    Scenario scenario_;
};

// hours of flight from the usable hydrogen at the given output power
double endurance_estimate(double usable_h2_g, double mean_power_w, double efficiency);
double endurance_estimate(const energy::HydrogenCylinder& cylinder, double mean_power_w,
                          double efficiency);

// serialization
std::string summary_to_json(const MissionSummary& s);
void write_mission_outputs(const MissionResult& result, const std::string& out_dir);

// fault-injection campaign: reruns a short mission once per single failure
struct FaultCaseResult {
    std::string spec;  // empty for the baseline case
    bool mission_maintained = false;
    uint64_t commands_lost = 0;
    std::string termination;
    double flight_time_s = 0.0;
};

std::vector<FaultCaseResult> run_fault_campaign(const VehicleParams& vehicle,
                                                const ControllerConfig& control,
                                                const Scenario& base, bool parallel = true);

}  // namespace h2tail
