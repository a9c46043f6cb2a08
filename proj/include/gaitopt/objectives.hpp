#pragma once

// The three gait objectives computed from a simulation trace: normalized
// speed with a lateral-drift penalty, time-averaged support margin and mean
// joint reaction load.

#include "gaitopt/evaluator.hpp"
#include "gaitopt/robot.hpp"

#include <optional>
#include <vector>

namespace gaitopt {

struct ObjectiveConstants {
    double v_ref = 0.15;    // m/s
    double lambda = 0.5;    // lateral drift weight
    std::optional<double> d_nom;  // m; unset means the standard-posture inscribed radius
    double failure_penalty = 10.0;

    void validate() const;
};

struct ObjectiveVector {
    double f_speed = 0.0;
    double f_stability = 0.0;
    double f_load = 0.0;

    // (-f_speed, -f_stability, f_load), truncated to the first `count` entries.
    std::vector<double> minimization(std::size_t count = 3) const;
};

struct Assessment {
    ObjectiveVector objectives;
    double constraint_violation = 0.0;
};

// Inscribed radius of the standard-posture support polygon.
double nominal_margin(const RobotModel& robot);

// dx / (T v_ref) - lambda (|dy| / (T v_ref))^2 with dx, dy per cycle.
double speed_score(double dx, double dy, double period, double v_ref, double lambda);

// min(d / d_nom, 1) inside the polygon, d / leg_length outside.
double normalized_margin(double margin, double d_nom, double leg_length);

double f_speed(const SimulationTrace& trace, double v_ref, double lambda);

// Mean normalized margin over the objective window. A trace that fell scores
// no better than its final sample.
double f_stability(const SimulationTrace& trace, double d_nom);

// Mean over the objective window of sum_j |F_j|, divided by the robot weight.
double f_load(const SimulationTrace& trace, double weight);

// Objectives plus constraint violation: the torque excess, and the failure
// penalty for falls, stuck runs and unreachable targets.
Assessment assess(const SimulationTrace& trace, const RobotModel& robot, const ObjectiveConstants& constants);

} // namespace gaitopt
