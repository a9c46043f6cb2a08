#include "gaitopt/statics.hpp"

#include "gaitopt/error.hpp"
#include "gaitopt/support_polygon.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace gaitopt {

namespace {

using Matrix63 = Eigen::Matrix<double, 6, 3>;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d s;
    s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return s;
}

// Column block of the balance matrix for one foot: [I; [r]x].
Matrix63 balance_block(const Eigen::Vector3d& lever) {
    Matrix63 b;
    b.topRows<3>().setIdentity();
    b.bottomRows<3>() = skew(lever);
    return b;
}

void residuals(ContactSolution& s, std::span<const Eigen::Vector3d> levers, double weight) {
    Eigen::Vector3d force = -weight * Eigen::Vector3d::UnitZ();
    Eigen::Vector3d moment = Eigen::Vector3d::Zero();
    for (std::size_t c = 0; c < levers.size(); ++c) {
        force += s.forces[c];
        moment += levers[c].cross(s.forces[c]);
    }
    s.force_residual = force.norm();
    s.moment_residual = moment.norm();
}

// Minimum-norm solution of the balance equations plus `active` rows forcing
// the normal component of the listed feet to zero. Returns the forces and the
// multipliers of the active rows.
std::pair<Eigen::VectorXd, Eigen::VectorXd> constrained_min_norm(std::span<const Eigen::Vector3d> levers,
                                                                 std::span<const Eigen::Vector3d> normals,
                                                                 const std::vector<std::size_t>& active,
                                                                 double weight) {
    const auto k = static_cast<Eigen::Index>(levers.size());
    const auto rows = 6 + static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 3 * k);
    for (Eigen::Index c = 0; c < k; ++c) a.block<6, 3>(0, 3 * c) = balance_block(levers[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < active.size(); ++i)
        a.block<1, 3>(6 + static_cast<Eigen::Index>(i), 3 * static_cast<Eigen::Index>(active[i])) =
            normals[active[i]].transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    rhs(2) = weight;
    const Eigen::MatrixXd gram = a * a.transpose();
    const Eigen::VectorXd nu = gram.completeOrthogonalDecomposition().solve(rhs);
    return {a.transpose() * nu, nu.tail(static_cast<Eigen::Index>(active.size()))};
}

} // namespace

ContactSolution distribute_contact_forces(std::span<const Eigen::Vector3d> feet, const Eigen::Vector3d& com,
                                          double weight, std::span<const Eigen::Vector3d> normals) {
    if (feet.empty()) throw StructuralError("distribute_contact_forces: no stance feet");
    std::vector<Point2> ground(feet.size());
    for (std::size_t c = 0; c < feet.size(); ++c) ground[c] = feet[c].head<2>();
    const double margin = signed_distance_to_hull(com.head<2>(), convex_hull(ground));
    return distribute_contact_forces(feet, com, weight, normals, margin);
}

ContactSolution distribute_contact_forces(std::span<const Eigen::Vector3d> feet, const Eigen::Vector3d& com,
                                          double weight, std::span<const Eigen::Vector3d> normals,
                                          double support_margin) {
    if (feet.empty()) throw StructuralError("distribute_contact_forces: no stance feet");
    if (normals.size() != feet.size()) throw StructuralError("distribute_contact_forces: one normal per foot required");

    const std::size_t k = feet.size();
    std::array<Eigen::Vector3d, 32> lever_storage;
    if (k > lever_storage.size()) throw StructuralError("distribute_contact_forces: too many feet");
    for (std::size_t c = 0; c < k; ++c) lever_storage[c] = feet[c] - com;
    const std::span<const Eigen::Vector3d> levers(lever_storage.data(), k);

    ContactSolution s;
    s.statically_feasible = support_margin >= 0.0;
    s.forces.resize(k);

    // Fast path: normal equations of the balance matrix, reduced to a 3x3
    // Schur complement in the moment multipliers.
    Eigen::Vector3d lever_sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d moment_gram = Eigen::Matrix3d::Zero();
    for (std::size_t c = 0; c < k; ++c) {
        const Eigen::Matrix3d r = skew(levers[c]);
        lever_sum += levers[c];
        moment_gram.noalias() += r * r.transpose();
    }
    const double count = static_cast<double>(k);
    const Eigen::Matrix3d sum_skew = skew(lever_sum);
    const Eigen::Matrix3d schur = moment_gram - sum_skew * sum_skew.transpose() / count;
    const Eigen::Vector3d load = weight * Eigen::Vector3d::UnitZ();
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(schur);
    const Eigen::Vector3d lambda_m = ldlt.solve(-sum_skew * load / count);
    const Eigen::Vector3d lambda_f = (load - sum_skew.transpose() * lambda_m) / count;
    for (std::size_t c = 0; c < k; ++c) s.forces[c] = lambda_f + lambda_m.cross(levers[c]);
    residuals(s, levers, weight);

    const double tolerance = 1e-9 * std::max(weight, 1.0);
    const bool finite = lambda_m.allFinite() && lambda_f.allFinite();
    if (ldlt.info() != Eigen::Success || !finite ||
        !(s.force_residual < tolerance && s.moment_residual < tolerance)) {
        // Rank-deficient stance (one or two feet, or collinear feet): least squares.
        const auto [f, unused] = constrained_min_norm(levers, normals, {}, weight);
        for (std::size_t c = 0; c < k; ++c) s.forces[c] = f.segment<3>(3 * static_cast<Eigen::Index>(c));
        residuals(s, levers, weight);
    }
    if (!s.statically_feasible) return s;

    const double slack = 1e-12 * std::max(weight, 1.0);
    auto normal_of = [&](std::size_t c) { return normals[c].dot(s.forces[c]); };
    bool violated = false;
    for (std::size_t c = 0; c < k; ++c) violated = violated || normal_of(c) < -slack;
    if (!violated) return s;

    // Primal active-set solve of min |F|^2 with non-negative normal components.
    std::vector<std::size_t> active;
    for (std::size_t iteration = 0; iteration < 4 * k + 10; ++iteration) {
        const auto [f, multipliers] = constrained_min_norm(levers, normals, active, weight);
        for (std::size_t c = 0; c < k; ++c) s.forces[c] = f.segment<3>(3 * static_cast<Eigen::Index>(c));

        Eigen::Index worst_multiplier = -1;
        for (Eigen::Index i = 0; i < multipliers.size(); ++i)
            if (multipliers(i) < -slack && (worst_multiplier < 0 || multipliers(i) < multipliers(worst_multiplier)))
                worst_multiplier = i;
        if (worst_multiplier >= 0) {
            active.erase(active.begin() + worst_multiplier);
            continue;
        }
        std::optional<std::size_t> worst_foot;
        for (std::size_t c = 0; c < k; ++c) {
            if (std::find(active.begin(), active.end(), c) != active.end()) continue;
            if (normal_of(c) < -slack && (!worst_foot || normal_of(c) < normal_of(*worst_foot))) worst_foot = c;
        }
        if (!worst_foot) break;
        active.push_back(*worst_foot);
    }
    residuals(s, levers, weight);
    return s;
}

JointForces joint_reaction_forces(const LegModel& leg, const Eigen::Vector3d& contact_force) {
    const Eigen::Vector3d gravity(0.0, 0.0, -kGravity);
    const Eigen::Vector3d shank = leg.link_masses[1] * gravity;
    const Eigen::Vector3d whole = (leg.link_masses[0] + leg.link_masses[1]) * gravity;
    return {contact_force + whole, contact_force + whole, contact_force + shank};
}

JointVector gravity_torques(const LegModel& leg, const LegGeometry& g) {
    // dV/dq_j = sum over distal point masses of m g (a_j x (r - p_j))_z.
    const double g1 = kGravity * leg.link_masses[0];
    const double g2 = kGravity * leg.link_masses[1];
    auto lever_z = [&](const Eigen::Vector3d& axis, const Eigen::Vector3d& point, const Eigen::Vector3d& pivot) {
        return axis.cross(point - pivot).z();
    };
    const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    return {g1 * lever_z(up, g.thigh_midpoint, g.hip) + g2 * lever_z(up, g.shank_midpoint, g.hip),
            g1 * lever_z(g.pitch_axis, g.thigh_midpoint, g.hip) + g2 * lever_z(g.pitch_axis, g.shank_midpoint, g.hip),
            g2 * lever_z(g.pitch_axis, g.shank_midpoint, g.knee)};
}

JointVector gravity_torques(const LegModel& leg, const JointState& q) {
    const double l1 = leg.link_lengths[0];
    const double l2 = leg.link_lengths[1];
    const double m1 = leg.link_masses[0];
    const double m2 = leg.link_masses[1];
    const double c2 = std::cos(q.angles[1]);
    const double c23 = std::cos(q.angles[1] + q.angles[2]);
    return {0.0, kGravity * (m1 * (-0.5 * l1 * c2) + m2 * (-l1 * c2 - 0.5 * l2 * c23)),
            kGravity * (m2 * (-0.5 * l2 * c23))};
}

JointVector joint_torques(const LegModel& leg, const JointState& q, const HipMount& hip,
                          const Eigen::Vector3d& contact_force) {
    const Eigen::Vector3d contact = -leg_jacobian(leg, q, hip).transpose() * contact_force;
    const auto gravity = gravity_torques(leg, q);
    return {contact(0) + gravity[0], contact(1) + gravity[1], contact(2) + gravity[2]};
}

JointVector joint_torques(const LegModel& leg, const LegGeometry& geometry, const Eigen::Vector3d& contact_force) {
    const Eigen::Vector3d contact = -leg_jacobian(geometry).transpose() * contact_force;
    const auto gravity = gravity_torques(leg, geometry);
    return {contact(0) + gravity[0], contact(1) + gravity[1], contact(2) + gravity[2]};
}

} // namespace gaitopt
