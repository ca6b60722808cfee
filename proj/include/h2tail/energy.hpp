/*
  Hybrid powertrain: pressurized hydrogen store, PEM fuel cell, four
  lithium buffer packs and the diode-OR power bus joining them.

  All step functions are pure state transitions; callers own the state.
*/
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace h2tail::energy {

// usable chemical energy per gram of hydrogen (lower heating value)
inline constexpr double kLhvWhPerGram = 33.3;

struct OverloadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DepletionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Density of pressurized hydrogen at room temperature, g/L, valid for
// 0..500 bar. The fit has a small nonphysical offset at 0 bar which is
// kept because the catalog numbers are derived from this exact curve.
// temperature_c is accepted but currently unused (room-temperature fit).
double hydrogen_density(double pressure_bar);
double hydrogen_density(double pressure_bar, double temperature_c);

struct HydrogenCylinder {
    double volume_l = 6.8;
    double pressure_bar = 300.0;
    double min_usable_pressure_bar = 5.0;
};

// grams of hydrogen currently stored
double hydrogen_mass(const HydrogenCylinder& cylinder);

// inverse of hydrogen_mass at fixed volume; bisection on [0, 500] bar
double pressure_from_mass(double mass_g, double volume_l);

// grams per hour consumed to produce mean_power_w electrical output
double fuel_flow(double mean_power_w, double efficiency);

struct FuelCell {
    double max_continuous_power_w = 800.0;
    double peak_power_with_aux_w = 1400.0;
    double open_circuit_voltage_v = 25.2;
    double min_voltage_v = 19.6;
    // output resistance of the stack seen by the bus; chosen so the cell
    // holds the bus near the battery charge cap while delivering its
    // continuous rating
    double droop_ohm = 0.012;
    // (power W, efficiency) knots, piecewise linear, held flat outside
    std::vector<std::pair<double, double>> efficiency_curve = {{700.0, 0.56}, {800.0, 0.53}};
    double aux_battery_capacity_wh = 40.0;  // 1800 mAh 6S auxiliary pack
    double aux_recharge_w = 50.0;

    double efficiency_at(double power_w) const;
};

struct BatteryPack {
    int cell_count = 6;
    double capacity_ah = 4.5;
    double energy_wh = 99.9;
    double mass_kg = 0.64;
    double max_continuous_current_a = 90.0;
    double max_burst_current_a = 180.0;
    double max_charge_current_a = 4.5;
    double internal_resistance_ohm = 0.02;
    double state_of_charge = 1.0;

    // piecewise-linear open-circuit voltage; steepens near full so that
    // the 24.8 V charge cap corresponds to >95% charge
    double open_circuit_voltage() const;
};

struct PowerBus {
    double diode_forward_drop_v = 0.2;
    double charge_cap_v = 24.8;  // fuel-cell nominal 25.0 V minus diode drop
    FuelCell fuel_cell;
    std::array<BatteryPack, 4> packs;
    double bus_voltage_v = 0.0;  // last solved operating point
};

struct PowerPlantState {
    HydrogenCylinder cylinder;
    PowerBus bus;
    double aux_energy_wh = 40.0;
    bool fuel_cell_available = true;
    // accumulated accounting
    double h2_consumed_g = 0.0;
    double fc_energy_wh = 0.0;
    double battery_energy_out_wh = 0.0;
};

struct PowerStepResult {
    PowerPlantState next;
    double fc_power_w = 0.0;
    double battery_power_w = 0.0;  // positive: packs discharging
    double charge_power_w = 0.0;   // positive: packs charging
    double bus_voltage_v = 0.0;
    double h2_consumed_g = 0.0;
};

// Advance the powertrain by dt under a constant-power load. Throws
// OverloadError when the combined fuel-cell peak and battery burst
// capability cannot meet the load, DepletionError when both the cylinder
// and the packs are exhausted.
PowerStepResult powerplant_step(const PowerPlantState& state, double load_power_w, double dt_s);

// minutes of flight left on the packs alone at the given power draw
double battery_reserve_endurance(const std::array<BatteryPack, 4>& packs, double cruise_power_w);

}  // namespace h2tail::energy
