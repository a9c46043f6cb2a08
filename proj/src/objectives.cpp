#include "gaitopt/objectives.hpp"

#include "gaitopt/error.hpp"
#include "gaitopt/support_polygon.hpp"

#include <algorithm>
#include <cmath>

namespace gaitopt {

void ObjectiveConstants::validate() const {
    if (!(v_ref > 0.0)) throw ConfigError("objectives.v_ref_mps", "must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("objectives.lambda", "must be non-negative");
    if (d_nom && !(*d_nom > 0.0)) throw ConfigError("objectives.d_nom_m", "must be positive");
    if (!(failure_penalty >= 0.0)) throw ConfigError("objectives.failure_penalty", "must be non-negative");
}

std::vector<double> ObjectiveVector::minimization(std::size_t count) const {
    std::vector<double> v{-f_speed, -f_stability, f_load};
    v.resize(std::min<std::size_t>(count, 3));
    return v;
}

double nominal_margin(const RobotModel& robot) {
    std::vector<Point2> points;
    for (const auto& f : robot.nominal_footholds()) points.push_back(f.head<2>());
    return inscribed_radius(convex_hull(points));
}

double speed_score(double dx, double dy, double period, double v_ref, double lambda) {
    const double scale = period * v_ref;
    const double lateral = std::abs(dy) / scale;
    return dx / scale - lambda * lateral * lateral;
}

double normalized_margin(double margin, double d_nom, double leg_length) {
    if (margin >= 0.0) return std::min(margin / d_nom, 1.0);
    return margin / leg_length;
}

double f_speed(const SimulationTrace& trace, double v_ref, double lambda) {
    return speed_score(trace.dx, trace.dy, trace.period, v_ref, lambda);
}

double f_stability(const SimulationTrace& trace, double d_nom) {
    if (trace.measured_count() == 0) return normalized_margin(-trace.leg_length, d_nom, trace.leg_length);
    double sum = 0.0;
    for (std::size_t k = trace.first_measured; k < trace.samples.size(); ++k)
        sum += normalized_margin(trace.samples[k].support_margin, d_nom, trace.leg_length);
    double value = sum / static_cast<double>(trace.measured_count());
    if (trace.failure == Failure::fell)
        value = std::min(value, normalized_margin(trace.samples.back().support_margin, d_nom, trace.leg_length));
    return value;
}

double f_load(const SimulationTrace& trace, double weight) {
    if (trace.measured_count() == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = trace.first_measured; k < trace.samples.size(); ++k) sum += trace.samples[k].joint_force_sum;
    return sum / (static_cast<double>(trace.measured_count()) * weight);
}

Assessment assess(const SimulationTrace& trace, const RobotModel& robot, const ObjectiveConstants& constants) {
    const double d_nom = constants.d_nom.value_or(nominal_margin(robot));
    Assessment a;
    a.objectives.f_speed = f_speed(trace, constants.v_ref, constants.lambda);
    a.objectives.f_stability = f_stability(trace, d_nom);
    a.objectives.f_load = f_load(trace, robot.weight());
    a.constraint_violation = trace.torque_violation;
    if (trace.failure == Failure::fell || trace.failure == Failure::stuck || trace.failure == Failure::unreachable)
        a.constraint_violation += constants.failure_penalty;
    return a;
}

} // namespace gaitopt
