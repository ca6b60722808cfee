#include "h2tail/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "h2tail/bus.hpp"

namespace h2tail {

namespace {

PlanStep parse_plan_line(const std::string& line) {
    std::istringstream in(line);
    std::string word;
    in >> word;
    PlanStep step;
    if (word == "takeoff") {
        step.kind = PlanStep::Kind::Takeoff;
    } else if (word == "hover") {
        step.kind = PlanStep::Kind::Hover;
        if (!(in >> step.duration_s) || step.duration_s < 0.0)
            throw ConfigError("plan: hover needs a nonnegative duration: " + line);
    } else if (word == "cruise") {
        step.kind = PlanStep::Kind::Cruise;
        if (!(in >> step.duration_s) || step.duration_s < 0.0)
            throw ConfigError("plan: cruise needs a nonnegative duration: " + line);
    } else if (word == "cruise_until_pressure") {
        step.kind = PlanStep::Kind::CruiseUntilPressure;
        if (!(in >> step.pressure_bar) || step.pressure_bar < 0.0)
            throw ConfigError("plan: cruise_until_pressure needs a pressure: " + line);
    } else if (word == "land") {
        step.kind = PlanStep::Kind::Land;
    } else {
        throw ConfigError("plan: unknown directive: " + line);
    }
    std::string extra;
    if (in >> extra) throw ConfigError("plan: trailing content: " + line);
    return step;
}

}  // namespace

Scenario Scenario::from_config(const KeyValueConfig& cfg) {
    Scenario s;
    double speed = cfg.get_double("wind.mean_mps", 0.0);
    double dir_deg = cfg.get_double("wind.direction_deg", 0.0);
    double dir = dir_deg * M_PI / 180.0;
    s.wind_mean = speed * Eigen::Vector3d(std::cos(dir), std::sin(dir), 0.0);
    s.turbulence_sigma = cfg.get_double("wind.turbulence_sigma_mps", 0.0);

    s.cylinder.volume_l = cfg.get_double("cylinder.volume_l", s.cylinder.volume_l);
    s.cylinder.pressure_bar = cfg.get_double("cylinder.pressure_bar", s.cylinder.pressure_bar);
    s.cylinder.min_usable_pressure_bar =
        cfg.get_double("cylinder.min_usable_pressure_bar", s.cylinder.min_usable_pressure_bar);
    if (s.cylinder.volume_l <= 0.0) throw ConfigError("cylinder.volume_l must be positive");
    if (s.cylinder.pressure_bar < 0.0 || s.cylinder.pressure_bar > 500.0)
        throw ConfigError("cylinder.pressure_bar outside [0, 500]");

    s.payload_power_w = cfg.get_double("power.payload_w", s.payload_power_w);
    s.overhead_power_w = cfg.get_double("power.overhead_w", s.overhead_power_w);

    s.seed = static_cast<uint64_t>(cfg.get_int("sim.seed", 0));
    s.log_period_s = cfg.get_double("sim.log_period_s", s.log_period_s);
    s.cruise_speed_mps = cfg.get_double("sim.cruise_speed_mps", s.cruise_speed_mps);
    s.cruise_altitude_m = cfg.get_double("sim.cruise_altitude_m", s.cruise_altitude_m);
    s.hover_altitude_m = cfg.get_double("sim.hover_altitude_m", s.hover_altitude_m);
    s.leg_length_m = cfg.get_double("sim.leg_length_m", s.leg_length_m);
    s.max_sim_time_s = cfg.get_double("sim.max_sim_time_s", s.max_sim_time_s);
    s.energy_dt_s = cfg.get_double("sim.energy_dt_s", s.energy_dt_s);

    for (const auto& line : cfg.list_section("plan")) s.plan.push_back(parse_plan_line(line));

    for (const auto& line : cfg.list_section("failures")) {
        std::istringstream in(line);
        std::string at;
        TimedFailure f;
        if (!(in >> at >> f.time_s >> f.spec) || at != "at")
            throw ConfigError("failures: expected `at <t_s> <spec>`: " + line);
        bus::parse_failure_spec(f.spec);  // validate now, fail at load time
        s.failures.push_back(f);
    }
    std::stable_sort(s.failures.begin(), s.failures.end(),
                     [](const TimedFailure& a, const TimedFailure& b) { return a.time_s < b.time_s; });

    cfg.reject_unknown();
    // an empty plan is a zero-duration scenario: the run ends immediately
    return s;
}

Scenario Scenario::from_file(const std::string& path, const std::vector<std::string>& overrides) {
    KeyValueConfig cfg = KeyValueConfig::parse_file(path, {"plan", "failures"});
    for (const auto& o : overrides) cfg.apply_override(o);
    return from_config(cfg);
}

}  // namespace h2tail
