#include "gaitopt/support_polygon.hpp"

#include "gaitopt/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaitopt {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

} // namespace

std::vector<Point2> convex_hull(std::span<const Point2> points) {
    if (points.empty()) throw StructuralError("convex_hull: no points");
    std::vector<Point2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double signed_distance_to_hull(const Point2& point, std::span<const Point2> hull) {
    if (hull.empty()) throw StructuralError("signed_distance_to_hull: empty hull");
    if (hull.size() == 1) return -(point - hull[0]).norm();
    if (hull.size() == 2) return -distance_to_segment(point, hull[0], hull[1]);

    bool inside = true;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point2& a = hull[i];
        const Point2& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, point) < 0.0) inside = false;
        nearest = std::min(nearest, distance_to_segment(point, a, b));
    }
    return inside ? nearest : -nearest;
}

double inscribed_radius(std::span<const Point2> hull) {
    const std::size_t n = hull.size();
    if (n < 3) return 0.0;

    // Linear program in (x, y, r): maximize r subject to the distance to every
    // edge line being at least r. The optimum sits where three constraints are active.
    std::vector<Eigen::Vector2d> normals(n);
    std::vector<double> offsets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 edge = hull[(i + 1) % n] - hull[i];
        normals[i] = Eigen::Vector2d(-edge.y(), edge.x()).normalized();
        offsets[i] = normals[i].dot(hull[i]);
    }
    double best = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                Eigen::Matrix3d m;
                Eigen::Vector3d rhs;
                std::size_t rows[3] = {a, b, c};
                for (int k = 0; k < 3; ++k) {
                    m.row(k) << normals[rows[k]].x(), normals[rows[k]].y(), -1.0;
                    rhs(k) = offsets[rows[k]];
                }
                Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
                if (lu.rank() < 3) continue;
                const Eigen::Vector3d sol = lu.solve(rhs);
                const Point2 center(sol.x(), sol.y());
                const double r = sol.z();
                bool feasible = r > 0.0;
                for (std::size_t i = 0; i < n && feasible; ++i)
                    if (normals[i].dot(center) - offsets[i] < r - 1e-12) feasible = false;
                if (feasible) best = std::max(best, r);
            }
    return best;
}

} // namespace gaitopt
