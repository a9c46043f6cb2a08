#pragma once

// Height-field environments: flat ground, an incline starting at x = 0, and
// a single step whose riser sits at `step_edge_x`.

#include <Eigen/Core>

#include <string_view>

namespace gaitopt {

enum class TerrainKind { flat, slope, step };

TerrainKind parse_terrain_kind(std::string_view name);
std::string_view to_string(TerrainKind kind) noexcept;

struct Terrain {
    TerrainKind kind = TerrainKind::flat;
    double slope_deg = 10.0;
    double step_height = 0.10;
    double step_edge_x = 0.5;
    double friction = 0.6;

    static Terrain flat();
    static Terrain slope(double degrees = 10.0);
    static Terrain step(double height = 0.10, double edge_x = 0.5);

    double height_at(double x, double y) const noexcept;
    // Unit normal of the local surface plane. On the step riser the upper
    // surface normal is returned.
    Eigen::Vector3d surface_normal(double x, double y) const noexcept;
    void validate() const;
};

} // namespace gaitopt
