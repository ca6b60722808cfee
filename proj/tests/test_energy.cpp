#include <doctest.h>

#include <cmath>
#include <cstring>

#include "h2tail/catalog.hpp"
#include "h2tail/config.hpp"
#include "h2tail/energy.hpp"

using namespace h2tail::energy;

// absolute-tolerance check
#define CHECK_NEAR(a, b, tol) CHECK(std::fabs((a) - (b)) <= (tol))

TEST_SUITE_BEGIN("energy");

TEST_CASE("hydrogen density spot values") {
    CHECK_NEAR(hydrogen_density(300.0), 20.63, 0.01);
    CHECK_NEAR(hydrogen_density(0.0), 0.6187, 1e-12);
    CHECK_NEAR(hydrogen_density(350.0), 23.48, 0.01);
    // 2 L at 350 bar holds 46.96 g
    CHECK_NEAR(hydrogen_density(350.0) * 2.0, 46.96, 0.02);
}

TEST_CASE("hydrogen density domain") {
    CHECK_THROWS_AS(hydrogen_density(-1.0), std::domain_error);
    CHECK_THROWS_AS(hydrogen_density(500.1), std::domain_error);
    CHECK_NOTHROW(hydrogen_density(500.0));
    // temperature argument is reserved and currently ignored
    CHECK(hydrogen_density(300.0, -10.0) == hydrogen_density(300.0));
}

TEST_CASE("hydrogen mass") {
    CHECK(hydrogen_mass({6.8, 300.0, 5.0}) == doctest::Approx(140.3).epsilon(0.01));
    CHECK(hydrogen_mass({3.8, 379.0, 5.0}) == doctest::Approx(95.3).epsilon(0.01));
    // direct polynomial evaluation: rho(285) = 19.7455 g/L, x 6.8 L
    CHECK_NEAR(hydrogen_mass({6.8, 285.0, 5.0}), 134.27, 0.5);
}

TEST_CASE("mass is strictly increasing in pressure and invertible") {
    double prev = hydrogen_mass({1.0, 0.0, 0.0});
    for (int p = 1; p <= 500; ++p) {
        double m = hydrogen_mass({1.0, static_cast<double>(p), 0.0});
        CHECK(m > prev);
        prev = m;
    }
    for (double p = 0.0; p <= 500.0; p += 7.37) {
        double m = hydrogen_mass({6.8, p, 0.0});
        CHECK_NEAR(pressure_from_mass(m, 6.8), p, 1e-6);
    }
}

TEST_CASE("fuel flow") {
    CHECK_NEAR(fuel_flow(600.0, 0.53), 34.0, 0.2);
    CHECK_NEAR(fuel_flow(800.0, 0.53), 45.3, 0.2);
    CHECK(fuel_flow(0.0, 0.53) == 0.0);
    CHECK_THROWS_AS(fuel_flow(100.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(fuel_flow(100.0, -0.5), std::domain_error);
    CHECK_THROWS_AS(fuel_flow(100.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(fuel_flow(-1.0, 0.5), std::domain_error);
}

TEST_CASE("fuel cell efficiency curve") {
    FuelCell fc;
    CHECK(fc.efficiency_at(800.0) == doctest::Approx(0.53));
    CHECK(fc.efficiency_at(700.0) == doctest::Approx(0.56));
    CHECK(fc.efficiency_at(750.0) == doctest::Approx(0.545));
    // flat extension outside the published knots
    CHECK(fc.efficiency_at(100.0) == doctest::Approx(0.56));
    CHECK(fc.efficiency_at(1400.0) == doctest::Approx(0.53));
}

TEST_CASE("catalog metrics reference rows") {
    CylinderCatalogEntry cts68{"CTS", 6.8, 300.0, 3.1, {}, {}};
    auto m = catalog_metrics(cts68);
    CHECK(m.h2_mass_g == doctest::Approx(140.3).epsilon(0.01));
    CHECK(m.energy_wh == doctest::Approx(4671.0).epsilon(0.01));
    CHECK(m.specific_energy_wh_per_kg == doctest::Approx(1507.0).epsilon(0.015));
    CHECK_NEAR(m.weight_fraction_pct, 4.52, 0.05);

    CylinderCatalogEntry f68{"HES-F", 6.8, 300.0, 2.7, {}, {}};
    auto mf = catalog_metrics(f68);
    CHECK(mf.h2_mass_g == doctest::Approx(140.3).epsilon(0.01));
    CHECK(mf.specific_energy_wh_per_kg == doctest::Approx(1730.0).epsilon(0.015));
    CHECK_NEAR(mf.weight_fraction_pct, 5.20, 0.05);

    // degenerate entry: only the constant density term remains
    CylinderCatalogEntry degenerate{"x", 1.0, 0.0, 1.0, {}, {}};
    auto md = catalog_metrics(degenerate);
    CHECK_NEAR(md.h2_mass_g, 0.62, 0.005);
    CHECK_NEAR(md.energy_wh, 20.6, 0.05);
    CHECK_NEAR(md.specific_energy_wh_per_kg, 20.6, 0.05);
    CHECK_NEAR(md.weight_fraction_pct, 0.06, 0.005);
}

TEST_CASE("catalog file parses and reproduces the published table") {
    auto entries = parse_catalog_file(std::string(H2TAIL_DATA_DIR) + "/cylinders.txt");
    REQUIRE(entries.size() == 25);

    // published reference values: h2 g, energy Wh, Wh/kg, wt%
    struct Ref {
        const char* maker;
        double v, p, h2, wh, whkg, wt;
    };
    // the HES-A 5 L row prints 4.44% in the source table, which contradicts
    // its own mass and weight columns (117.4 g / 1.85 kg = 6.35%); the
    // self-consistent value is asserted instead
    static const Ref refs[] = {
        {"HES-A", 2.0, 350, 46.96, 1564, 1303, 3.91},
        {"HES-A", 2.5, 350, 58.7, 1955, 1564, 4.70},
        {"HES-A", 3.5, 350, 82.2, 2737, 1659, 4.98},
        {"HES-A", 5.0, 350, 117.4, 3910, 2113, 6.35},
        {"HES-A", 9.0, 350, 211.3, 7037, 2469, 7.41},
        {"HES-A", 12.0, 350, 281.8, 9383, 2681, 8.05},
        {"HES-A", 20.0, 350, 469.6, 15638, 2234, 6.71},
        {"Luxfer", 3.8, 379, 95.3, 3173, 1269, 3.81},
        {"Luxfer", 5.7, 379, 142.9, 4759, 1442, 4.33},
        {"Luxfer", 6.8, 300, 140.3, 4671, 1415, 4.25},
        {"Luxfer", 7.6, 379, 190.6, 6345, 1548, 4.65},
        {"Luxfer", 9.0, 300, 185.7, 6182, 1438, 4.32},
        {"CTS", 2.0, 300, 41.3, 1374, 1118, 3.36},
        {"CTS", 3.0, 300, 61.9, 2061, 1288, 3.87},
        {"CTS", 6.0, 300, 123.8, 4121, 1421, 4.27},
        {"CTS", 6.8, 300, 140.3, 4671, 1507, 4.52},
        {"CTS", 7.2, 300, 148.5, 4946, 1499, 4.50},
        {"CTS", 9.0, 300, 185.6, 6182, 1438, 4.32},
        {"CTS", 13.0, 300, 268.2, 8930, 1685, 5.06},
        {"HES-F", 2.0, 300, 41.26, 1374, 1145, 3.44},
        {"HES-F", 3.0, 300, 61.9, 2061, 1472, 4.42},
        {"HES-F", 6.0, 300, 123.8, 4121, 1649, 4.95},
        {"HES-F", 6.8, 300, 140.3, 4671, 1730, 5.20},
        {"HES-F", 7.2, 300, 148.5, 4946, 1766, 5.30},
        {"HES-F", 9.0, 300, 185.6, 6182, 1627, 4.89},
    };

    for (size_t i = 0; i < entries.size(); ++i) {
        const Ref& r = refs[i];
        CAPTURE(i);
        CHECK(entries[i].maker == r.maker);
        CHECK(entries[i].volume_l == doctest::Approx(r.v));
        CHECK(entries[i].rated_pressure_bar == doctest::Approx(r.p));
        auto m = catalog_metrics(entries[i]);
        CHECK(m.h2_mass_g == doctest::Approx(r.h2).epsilon(0.01));
        CHECK(m.energy_wh == doctest::Approx(r.wh).epsilon(0.01));
        CHECK(m.specific_energy_wh_per_kg == doctest::Approx(r.whkg).epsilon(0.015));
        CHECK_NEAR(m.weight_fraction_pct, r.wt, 0.05);
    }
}

TEST_CASE("catalog parse errors carry the row number") {
    CHECK_THROWS_WITH_AS(parse_catalog_text("CTS 6.8 300\n", "f"),
                         doctest::Contains("row 1"), h2tail::ConfigError);
    CHECK_THROWS_AS(parse_catalog_text("CTS 6.8 300 3.1 161\n", "f"), h2tail::ConfigError);
    CHECK_THROWS_AS(parse_catalog_text("CTS -1 300 3.1\n", "f"), h2tail::ConfigError);
    auto single = parse_catalog_text("# comment\nCTS 6.8 300 3.1\n", "f");
    CHECK(single.size() == 1);
}

TEST_CASE("powerplant: high demand splits between fuel cell and packs") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    for (auto& p : st.bus.packs) p.state_of_charge = 0.8;

    auto r = powerplant_step(st, 2000.0, 0.1);
    CHECK(r.fc_power_w == doctest::Approx(800.0).epsilon(0.05));
    CHECK(r.battery_power_w == doctest::Approx(1200.0).epsilon(0.06));
    CHECK(r.bus_voltage_v > 19.6);
    CHECK(r.bus_voltage_v < 25.2);
}

TEST_CASE("powerplant: idle at the charge cap leaves everything untouched") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    for (auto& p : st.bus.packs) p.state_of_charge = 0.97;  // ocv above 24.8

    auto r = powerplant_step(st, 0.0, 0.1);
    CHECK_NEAR(r.battery_power_w, 0.0, 1e-9);
    CHECK_NEAR(r.charge_power_w, 0.0, 1e-9);
    CHECK_NEAR(r.fc_power_w, 0.0, 1e-9);
    CHECK_NEAR(r.next.cylinder.pressure_bar, 285.0, 1e-9);
}

TEST_CASE("powerplant: hydrogen use matches the flow equation") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    // pin the efficiency at 0.55 across the band
    st.bus.fuel_cell.efficiency_curve = {{0.0, 0.55}, {1400.0, 0.55}};
    for (auto& p : st.bus.packs) p.state_of_charge = 0.50;

    // packs half-empty: the cell runs at its continuous rating, covering the
    // 550 W load and recharging; one hour of that consumes per eq. flow
    double h2 = 0.0, fc_wh = 0.0;
    for (int i = 0; i < 36000; ++i) {
        auto r = powerplant_step(st, 550.0, 0.1);
        h2 += r.h2_consumed_g;
        fc_wh += r.fc_power_w * 0.1 / 3600.0;
        st = r.next;
    }
    // energy conservation: chemical energy x efficiency = electrical output
    CHECK(h2 * kLhvWhPerGram * 0.55 == doctest::Approx(fc_wh).epsilon(1e-9));
}

TEST_CASE("powerplant: sustained 550 W for one hour at 0.55 consumes ~30 g") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    st.bus.fuel_cell.efficiency_curve = {{0.0, 0.55}, {1400.0, 0.55}};
    // decouple the packs so the cell carries exactly the load
    for (auto& p : st.bus.packs) p.internal_resistance_ohm = 1e9;
    double h2 = 0.0;
    for (int i = 0; i < 36000; ++i) {
        auto r = powerplant_step(st, 550.0, 0.1);
        h2 += r.h2_consumed_g;
        st = r.next;
    }
    // the stack covers the diode drop on top of the bus-side 550 W, so the
    // draw sits just above the hand-evaluated 30.03 g
    CHECK_NEAR(h2, 30.03, 0.35);
}

TEST_CASE("powerplant: charge cap voltage and soc band") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    for (auto& p : st.bus.packs) p.state_of_charge = 0.70;

    double max_charging_terminal = 0.0;
    for (int i = 0; i < 36000; ++i) {  // one hour at light load
        auto r = powerplant_step(st, 300.0, 0.1);
        st = r.next;
        if (r.charge_power_w > 1e-6)
            max_charging_terminal = std::max(max_charging_terminal, std::min(r.bus_voltage_v, 24.8));
        for (const auto& p : st.bus.packs) {
            CHECK(p.state_of_charge >= 0.0);
            CHECK(p.state_of_charge <= 1.0);
        }
    }
    CHECK(max_charging_terminal <= 24.8 + 1e-6);
    // recharged to at least 95% before the cap stops the current
    double soc = 0.0;
    for (const auto& p : st.bus.packs) soc += p.state_of_charge / 4.0;
    CHECK(soc >= 0.95);
}

TEST_CASE("powerplant: overload and depletion errors") {
    PowerPlantState st;
    st.cylinder = {6.8, 285.0, 5.0};
    CHECK_THROWS_AS((void)powerplant_step(st, 25000.0, 0.1), OverloadError);

    PowerPlantState dead;
    dead.cylinder = {6.8, 3.0, 5.0};  // below the usable floor
    for (auto& p : dead.bus.packs) p.state_of_charge = 0.0;
    CHECK_THROWS_AS((void)powerplant_step(dead, 500.0, 0.1), DepletionError);
}

TEST_CASE("powerplant: deterministic, bit-identical repetition") {
    auto run = [](double load) {
        PowerPlantState st;
        st.cylinder = {6.8, 285.0, 5.0};
        for (auto& p : st.bus.packs) p.state_of_charge = 0.8;
        double acc = 0.0;
        for (int i = 0; i < 1000; ++i) {
            auto r = powerplant_step(st, load, 0.1);
            st = r.next;
            acc += r.bus_voltage_v + r.h2_consumed_g;
        }
        return std::pair(st.cylinder.pressure_bar, acc);
    };
    auto a = run(777.0);
    auto b = run(777.0);
    CHECK(std::memcmp(&a.first, &b.first, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.second, &b.second, sizeof(double)) == 0);
}

TEST_CASE("battery reserve endurance") {
    std::array<BatteryPack, 4> packs{};
    CHECK_NEAR(battery_reserve_endurance(packs, 550.0), 43.6, 1.0);
    CHECK(battery_reserve_endurance(packs, 550.0) >= 20.0);

    for (auto& p : packs) p.state_of_charge = 0.5;
    CHECK_NEAR(battery_reserve_endurance(packs, 600.0), 20.0, 0.3);

    for (auto& p : packs) p.state_of_charge = 0.0;
    CHECK(battery_reserve_endurance(packs, 500.0) == 0.0);
}

TEST_CASE("battery open-circuit voltage is monotone in soc") {
    BatteryPack p;
    double prev = -1.0;
    for (double s = 0.0; s <= 1.0; s += 0.01) {
        p.state_of_charge = s;
        double v = p.open_circuit_voltage();
        CHECK(v >= prev);
        prev = v;
    }
    p.state_of_charge = 0.2;
    CHECK(p.open_circuit_voltage() == doctest::Approx(22.2));
    p.state_of_charge = 1.0;
    CHECK(p.open_circuit_voltage() == doctest::Approx(25.2));
}

TEST_SUITE_END();
