#include "h2tail/energy.hpp"

#include <algorithm>
#include <cmath>

namespace h2tail::energy {

namespace {

// room-temperature fit, g/L
double density_poly(double p) {
    return -0.00002757 * p * p + 0.074969 * p + 0.6187;
}

}  // namespace

double hydrogen_density(double pressure_bar) {
    if (!(pressure_bar >= 0.0 && pressure_bar <= 500.0))
        throw std::domain_error("hydrogen_density: pressure outside [0, 500] bar: " +
                                std::to_string(pressure_bar));
    return density_poly(pressure_bar);
}

double hydrogen_density(double pressure_bar, double temperature_c) {
    (void)temperature_c;  // reserved; only the room-temperature fit is shipped
    return hydrogen_density(pressure_bar);
}

double hydrogen_mass(const HydrogenCylinder& cylinder) {
    if (cylinder.volume_l <= 0.0)
        throw std::domain_error("hydrogen_mass: nonpositive volume");
    return hydrogen_density(cylinder.pressure_bar) * cylinder.volume_l;
}

double pressure_from_mass(double mass_g, double volume_l) {
    if (volume_l <= 0.0) throw std::domain_error("pressure_from_mass: nonpositive volume");
    double target = mass_g / volume_l;
    if (target <= density_poly(0.0)) return 0.0;
    if (target > density_poly(500.0))
        throw std::domain_error("pressure_from_mass: mass exceeds 500 bar capacity");
    // density is strictly increasing on [0, 500]; the quadratic's other
    // root lies far outside the physical range, so bisect
    double lo = 0.0, hi = 500.0;
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        if (density_poly(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double fuel_flow(double mean_power_w, double efficiency) {
    if (mean_power_w < 0.0)
        throw std::domain_error("fuel_flow: negative power");
    if (!(efficiency > 0.0 && efficiency < 1.0))
        throw std::domain_error("fuel_flow: efficiency outside (0, 1): " +
                                std::to_string(efficiency));
    return mean_power_w / (kLhvWhPerGram * efficiency);
}

double FuelCell::efficiency_at(double power_w) const {
    const auto& c = efficiency_curve;
    if (c.empty()) throw std::domain_error("fuel cell has empty efficiency curve");
    if (power_w <= c.front().first) return c.front().second;
    if (power_w >= c.back().first) return c.back().second;
    for (size_t i = 1; i < c.size(); ++i) {
        if (power_w <= c[i].first) {
            double t = (power_w - c[i - 1].first) / (c[i].first - c[i - 1].first);
            return c[i - 1].second + t * (c[i].second - c[i - 1].second);
        }
    }
    return c.back().second;
}

double BatteryPack::open_circuit_voltage() const {
    // knots: (soc, volts); bottom knee, 3.7 V/cell nominal region, top knee
    static constexpr double soc_k[] = {0.0, 0.2, 0.95, 1.0};
    static constexpr double v_k[] = {19.8, 22.2, 24.6, 25.2};
    double s = std::clamp(state_of_charge, 0.0, 1.0);
    for (int i = 1; i < 4; ++i) {
        if (s <= soc_k[i]) {
            double t = (s - soc_k[i - 1]) / (soc_k[i] - soc_k[i - 1]);
            return v_k[i - 1] + t * (v_k[i] - v_k[i - 1]);
        }
    }
    return v_k[3];
}

namespace {

// Pack current at a given bus voltage, positive = discharging.
// Charging runs through the 24.8 V cap so the terminal never exceeds it.
double pack_current(const BatteryPack& p, double v_bus, double charge_cap) {
    double ocv = p.open_circuit_voltage();
    if (v_bus <= ocv) {
        double i = (ocv - v_bus) / p.internal_resistance_ohm;
        if (p.state_of_charge <= 0.0) return 0.0;
        return std::min(i, p.max_burst_current_a);
    }
    double v_chg = std::min(v_bus, charge_cap);
    if (v_chg <= ocv) return 0.0;  // above cap, or already at cap voltage
    double i = (v_chg - ocv) / p.internal_resistance_ohm;
    if (p.state_of_charge >= 1.0) return 0.0;
    return -std::min(i, p.max_charge_current_a);
}

// Fuel-cell current into the bus at a given bus voltage, limited by both
// the droop line and the active power ceiling.
double fc_current(const FuelCell& fc, double v_bus, double power_limit_w) {
    if (power_limit_w <= 0.0) return 0.0;
    double v_stack = v_bus + 0.2;  // see PowerBus::diode_forward_drop_v
    double droop_i = (fc.open_circuit_voltage_v - 0.2 - v_bus) / fc.droop_ohm;
    double cap_i = power_limit_w / std::max(v_stack, fc.min_voltage_v);
    return std::max(0.0, std::min(droop_i, cap_i));
}

}  // namespace

PowerStepResult powerplant_step(const PowerPlantState& state, double load_power_w, double dt_s) {
    if (load_power_w < 0.0) throw std::domain_error("powerplant_step: negative load");
    if (dt_s <= 0.0) throw std::domain_error("powerplant_step: nonpositive dt");

    PowerStepResult res;
    res.next = state;
    PowerPlantState& s = res.next;
    const FuelCell& fc = s.bus.fuel_cell;
    const double drop = s.bus.diode_forward_drop_v;
    const double cap = s.bus.charge_cap_v;

    bool h2_available = s.fuel_cell_available &&
                        s.cylinder.pressure_bar > s.cylinder.min_usable_pressure_bar;

    // Solve the bus node equation sum_currents(V) = load/V by bisection.
    auto residual = [&](double v, double p_limit) {
        double i = h2_available ? fc_current(fc, v, p_limit) : 0.0;
        for (const auto& p : s.bus.packs) i += pack_current(p, v, cap);
        return i - load_power_w / v;
    };

    // The cell holds its continuous rating and lets the packs buffer the
    // peaks; the auxiliary transient headroom is a last resort when the
    // packs alone cannot close the balance.
    double v_lo = 12.0, v_hi = fc.open_circuit_voltage_v - drop + 1.0;
    double p_limit = h2_available ? fc.max_continuous_power_w : 0.0;
    if (residual(v_lo, p_limit) < 0.0 && h2_available && s.aux_energy_wh > 0.0)
        p_limit = fc.peak_power_with_aux_w;
    if (residual(v_lo, p_limit) < 0.0) {
        // even at deep sag the sources cannot carry the load
        bool packs_empty = true;
        for (const auto& p : s.bus.packs)
            if (p.state_of_charge > 1e-6) packs_empty = false;
        if (!h2_available && packs_empty)
            throw DepletionError("powerplant: cylinder and batteries depleted");
        throw OverloadError("powerplant: load " + std::to_string(load_power_w) +
                            " W exceeds combined source capability");
    }
    double lo = v_lo, hi = v_hi;
    if (residual(hi, p_limit) > 0.0) {
        // load zero / sources saturated upward; operating point at the rail
        lo = hi;
    } else {
        while (hi - lo > 1e-6) {
            double mid = 0.5 * (lo + hi);
            if (residual(mid, p_limit) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
    }
    double v_bus = 0.5 * (lo + hi);

    double i_fc = h2_available ? fc_current(fc, v_bus, p_limit) : 0.0;
    double fc_power = i_fc * (v_bus + drop);
    double batt_power = 0.0, charge_power = 0.0;

    for (auto& p : s.bus.packs) {
        double i = pack_current(p, v_bus, cap);
        if (i >= 0.0) {
            batt_power += i * v_bus;
        } else {
            charge_power += -i * std::min(v_bus, cap);
        }
        // state of charge tracks chemical energy at the open-circuit voltage
        double de_wh = p.open_circuit_voltage() * i * dt_s / 3600.0;
        p.state_of_charge = std::clamp(p.state_of_charge - de_wh / p.energy_wh, 0.0, 1.0);
        if (i > 0.0) s.battery_energy_out_wh += i * v_bus * dt_s / 3600.0;
    }

    // auxiliary account: drained above the continuous rating, trickle
    // recharged when the stack has headroom
    if (fc_power > fc.max_continuous_power_w) {
        s.aux_energy_wh -= (fc_power - fc.max_continuous_power_w) * dt_s / 3600.0;
        s.aux_energy_wh = std::max(0.0, s.aux_energy_wh);
    } else if (h2_available && s.aux_energy_wh < fc.aux_battery_capacity_wh) {
        s.aux_energy_wh = std::min(fc.aux_battery_capacity_wh,
                                   s.aux_energy_wh + fc.aux_recharge_w * dt_s / 3600.0);
    }

    // hydrogen drawn for the electrical energy produced this step
    double h2_g = 0.0;
    if (fc_power > 0.0) {
        double eff = fc.efficiency_at(fc_power);
        h2_g = fuel_flow(fc_power, eff) * dt_s / 3600.0;
        double mass = hydrogen_mass(s.cylinder) - h2_g;
        s.cylinder.pressure_bar = pressure_from_mass(std::max(0.0, mass), s.cylinder.volume_l);
        s.h2_consumed_g += h2_g;
        s.fc_energy_wh += fc_power * dt_s / 3600.0;
    }

    s.bus.bus_voltage_v = v_bus;
    res.fc_power_w = fc_power;
    res.battery_power_w = batt_power;
    res.charge_power_w = charge_power;
    res.bus_voltage_v = v_bus;
    res.h2_consumed_g = h2_g;
    return res;
}

double battery_reserve_endurance(const std::array<BatteryPack, 4>& packs, double cruise_power_w) {
    if (cruise_power_w <= 0.0) throw std::domain_error("battery_reserve_endurance: nonpositive power");
    double wh = 0.0;
    for (const auto& p : packs) wh += p.energy_wh * std::clamp(p.state_of_charge, 0.0, 1.0);
    return wh / cruise_power_w * 60.0;
}

}  // namespace h2tail::energy
