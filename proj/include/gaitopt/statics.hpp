#pragma once

// Quasi-static force bookkeeping: ground reaction distribution over stance
// feet, joint reaction forces and joint torques of a leg.

#include "gaitopt/robot.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace gaitopt {

struct ContactSolution {
    // Ground reaction on each foot (world frame), in input order.
    std::vector<Eigen::Vector3d> forces;
    // CoM projection inside the support polygon; forces then satisfy
    // non-negative normal components.
    bool statically_feasible = false;
    // |sum F - W z| and |sum r x F| about the CoM.
    double force_residual = 0.0;
    double moment_residual = 0.0;
};

// Minimum-norm ground reactions balancing weight `weight` acting at `com`.
// When the CoM projection lies inside the support polygon the normal
// components are constrained non-negative; otherwise the unconstrained
// least-squares forces are returned and the solution is flagged infeasible.
// Throws StructuralError when there are no feet or normals mismatch.
ContactSolution distribute_contact_forces(std::span<const Eigen::Vector3d> feet, const Eigen::Vector3d& com,
                                          double weight, std::span<const Eigen::Vector3d> normals);

// Same, with the signed support margin of the CoM already known.
ContactSolution distribute_contact_forces(std::span<const Eigen::Vector3d> feet, const Eigen::Vector3d& com,
                                          double weight, std::span<const Eigen::Vector3d> normals,
                                          double support_margin);

using JointVector = std::array<double, kJointsPerLeg>;
using JointForces = std::array<Eigen::Vector3d, kJointsPerLeg>;

// Force carried by each joint: the ground reaction plus the weight of every
// link distal to the joint. `contact_force` is expressed in the body frame.
JointForces joint_reaction_forces(const LegModel& leg, const Eigen::Vector3d& contact_force);

// Motor torques holding the leg against the ground reaction and link gravity:
// tau = J^T (-F) + dV/dq.
JointVector joint_torques(const LegModel& leg, const JointState& q, const HipMount& hip,
                          const Eigen::Vector3d& contact_force);
JointVector joint_torques(const LegModel& leg, const LegGeometry& geometry, const Eigen::Vector3d& contact_force);

// dV/dq of the link point masses alone.
JointVector gravity_torques(const LegModel& leg, const JointState& q);
JointVector gravity_torques(const LegModel& leg, const LegGeometry& geometry);

} // namespace gaitopt
