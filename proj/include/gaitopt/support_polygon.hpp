#pragma once

// Support-polygon geometry in the ground plane.

#include <Eigen/Core>

#include <span>
#include <vector>

namespace gaitopt {

using Point2 = Eigen::Vector2d;

// Counterclockwise hull without collinear boundary points. One distinct point
// yields that point, collinear input yields the two endpoints.
// Throws StructuralError on empty input.
std::vector<Point2> convex_hull(std::span<const Point2> points);

// Positive inside (distance to the nearest edge), negative outside (distance
// to the hull). Point and segment hulls always give minus the distance to them.
double signed_distance_to_hull(const Point2& point, std::span<const Point2> hull);

// Radius of the largest circle inside a counterclockwise convex hull; 0 for
// hulls with fewer than three vertices.
double inscribed_radius(std::span<const Point2> hull);

} // namespace gaitopt
