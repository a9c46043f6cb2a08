#include "gaitopt/terrain.hpp"

#include "gaitopt/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gaitopt {

namespace {
double radians(double deg) { return deg * std::numbers::pi / 180.0; }
} // namespace

TerrainKind parse_terrain_kind(std::string_view name) {
    if (name == "flat") return TerrainKind::flat;
    if (name == "slope") return TerrainKind::slope;
    if (name == "step") return TerrainKind::step;
    throw ConfigError("terrain.kind", "unknown terrain '" + std::string(name) + "' (expected flat|slope|step)");
}

std::string_view to_string(TerrainKind kind) noexcept {
    switch (kind) {
    case TerrainKind::flat: return "flat";
    case TerrainKind::slope: return "slope";
    case TerrainKind::step: return "step";
    }
    return "unknown";
}

Terrain Terrain::flat() { return Terrain{}; }

Terrain Terrain::slope(double degrees) {
    Terrain t;
    t.kind = TerrainKind::slope;
    t.slope_deg = degrees;
    return t;
}

Terrain Terrain::step(double height, double edge_x) {
    Terrain t;
    t.kind = TerrainKind::step;
    t.step_height = height;
    t.step_edge_x = edge_x;
    return t;
}

double Terrain::height_at(double x, double /*y*/) const noexcept {
    switch (kind) {
    case TerrainKind::flat: return 0.0;
    case TerrainKind::slope: return x >= 0.0 ? x * std::tan(radians(slope_deg)) : 0.0;
    case TerrainKind::step: return x >= step_edge_x ? step_height : 0.0;
    }
    return 0.0;
}

Eigen::Vector3d Terrain::surface_normal(double x, double /*y*/) const noexcept {
    if (kind == TerrainKind::slope && x >= 0.0) {
        const double a = radians(slope_deg);
        return {-std::sin(a), 0.0, std::cos(a)};
    }
    return Eigen::Vector3d::UnitZ();
}

void Terrain::validate() const {
    if (!(slope_deg >= 0.0 && slope_deg <= 30.0)) throw ConfigError("terrain.slope_deg", "must lie in [0, 30]");
    if (!(step_height >= 0.0)) throw ConfigError("terrain.step_height_m", "must be non-negative");
    if (!std::isfinite(step_edge_x)) throw ConfigError("terrain.step_edge_x_m", "must be finite");
    if (!(friction > 0.0)) throw ConfigError("terrain.friction", "must be positive");
}

} // namespace gaitopt
