/*
  Scenario files: plain-text sections
    [wind] [cylinder] [power] [sim]  key = value
    [plan]      ordered flight-plan lines
    [failures]  `at <t_s> <failure-spec>` lines
*/
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "h2tail/config.hpp"
#include "h2tail/energy.hpp"

namespace h2tail {

struct PlanStep {
    enum class Kind { Takeoff, Hover, Cruise, CruiseUntilPressure, Land };
    Kind kind = Kind::Takeoff;
    double duration_s = 0.0;
    double pressure_bar = 0.0;
};

struct TimedFailure {
    double time_s = 0.0;
    std::string spec;
};

struct Scenario {
    Eigen::Vector3d wind_mean{0, 0, 0};
    double turbulence_sigma = 0.0;
    energy::HydrogenCylinder cylinder;
    double payload_power_w = 60.0;
    double overhead_power_w = 40.0;
    std::vector<PlanStep> plan;
    std::vector<TimedFailure> failures;
    uint64_t seed = 0;
    double log_period_s = 1.0;
    double cruise_speed_mps = 20.0;
    double cruise_altitude_m = 60.0;
    double hover_altitude_m = 15.0;
    double leg_length_m = 600.0;
    double max_sim_time_s = 30000.0;
    double energy_dt_s = 0.1;

    static Scenario from_config(const KeyValueConfig& cfg);
    static Scenario from_file(const std::string& path,
                              const std::vector<std::string>& overrides = {});
};

}  // namespace h2tail
