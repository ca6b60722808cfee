/*
  Pressure-cylinder catalog: parsing and derived storage metrics.

  Catalog file format, one entry per line:
      maker volume_L pressure_bar weight_kg [diameter_mm length_mm]
  `#` starts a comment. Maker labels may not contain whitespace.
*/
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace h2tail::energy {

struct CylinderCatalogEntry {
    std::string maker;
    double volume_l = 0.0;
    double rated_pressure_bar = 0.0;
    double dry_weight_kg = 0.0;
    std::optional<double> diameter_mm;
    std::optional<double> length_mm;
};

struct CatalogMetrics {
    double h2_mass_g = 0.0;
    double energy_wh = 0.0;
    double specific_energy_wh_per_kg = 0.0;
    double weight_fraction_pct = 0.0;
};

CatalogMetrics catalog_metrics(const CylinderCatalogEntry& entry);

// throws ConfigError with the offending row number on malformed input
std::vector<CylinderCatalogEntry> parse_catalog_file(const std::string& path);
std::vector<CylinderCatalogEntry> parse_catalog_text(const std::string& text,
                                                     const std::string& origin = "<string>");

}  // namespace h2tail::energy
