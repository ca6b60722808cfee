#include "h2tail/catalog.hpp"

#include <fstream>
#include <sstream>

#include "h2tail/config.hpp"
#include "h2tail/energy.hpp"

namespace h2tail::energy {

CatalogMetrics catalog_metrics(const CylinderCatalogEntry& entry) {
    if (entry.volume_l <= 0.0 || entry.dry_weight_kg <= 0.0)
        throw std::domain_error("catalog_metrics: invalid entry " + entry.maker);
    CatalogMetrics m;
    m.h2_mass_g = hydrogen_density(entry.rated_pressure_bar) * entry.volume_l;
    m.energy_wh = m.h2_mass_g * kLhvWhPerGram;
    m.specific_energy_wh_per_kg = m.energy_wh / entry.dry_weight_kg;
    m.weight_fraction_pct = m.h2_mass_g / (entry.dry_weight_kg * 1000.0) * 100.0;
    return m;
}

std::vector<CylinderCatalogEntry> parse_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open catalog file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_catalog_text(ss.str(), path);
}

std::vector<CylinderCatalogEntry> parse_catalog_text(const std::string& text,
                                                     const std::string& origin) {
    std::vector<CylinderCatalogEntry> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        CylinderCatalogEntry e;
        if (!(row >> e.maker)) continue;  // blank line
        if (!(row >> e.volume_l >> e.rated_pressure_bar >> e.dry_weight_kg))
            throw ConfigError(origin + ": row " + std::to_string(lineno) +
                              ": expected `maker volume_L pressure_bar weight_kg`");
        double d, l;
        if (row >> d) {
            if (!(row >> l))
                throw ConfigError(origin + ": row " + std::to_string(lineno) +
                                  ": diameter given without length");
            e.diameter_mm = d;
            e.length_mm = l;
        }
        std::string extra;
        if (row >> extra)
            throw ConfigError(origin + ": row " + std::to_string(lineno) +
                              ": trailing content: " + extra);
        if (e.volume_l <= 0.0 || e.dry_weight_kg <= 0.0 || e.rated_pressure_bar < 0.0)
            throw ConfigError(origin + ": row " + std::to_string(lineno) +
                              ": nonpositive volume/weight or negative pressure");
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace h2tail::energy
