#include "gaitopt/evaluator.hpp"

#include "gaitopt/error.hpp"
#include "gaitopt/statics.hpp"
#include "gaitopt/support_polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gaitopt {

namespace {

constexpr double kSlipTolerance = 1e-6;
constexpr double kPenetrationTolerance = 1e-9;

struct LegState {
    bool stance = false;
    bool blocked = false;
    Eigen::Vector3d foothold = Eigen::Vector3d::Zero();  // world, while in stance
    Eigen::Vector3d lift = Eigen::Vector3d::Zero();      // world, where the current swing began
    Eigen::Vector3d foot = Eigen::Vector3d::Zero();      // world, current position
};

Eigen::Vector2d planar(const BodyPose& pose, const Eigen::Vector3d& body_point) {
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    return {pose.position.x() + c * body_point.x() - s * body_point.y(),
            pose.position.y() + s * body_point.x() + c * body_point.y()};
}

Eigen::Vector3d on_ground(const Terrain& terrain, const Eigen::Vector2d& xy) {
    return {xy.x(), xy.y(), terrain.height_at(xy.x(), xy.y())};
}

// Least-squares planar rigid transform mapping body targets onto world footholds.
void fit_pose(BodyPose& pose, std::span<const Eigen::Vector2d> targets, std::span<const Eigen::Vector2d> footholds) {
    const std::size_t m = targets.size();
    if (m == 0) return;
    if (m == 1) {
        const Eigen::Vector2d placed = planar(BodyPose{Eigen::Vector3d::Zero(), pose.yaw},
                                              Eigen::Vector3d(targets[0].x(), targets[0].y(), 0.0));
        pose.position.head<2>() = footholds[0] - placed;
        return;
    }
    Eigen::Vector2d q_mean = Eigen::Vector2d::Zero();
    Eigen::Vector2d p_mean = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
        q_mean += targets[i];
        p_mean += footholds[i];
    }
    q_mean /= static_cast<double>(m);
    p_mean /= static_cast<double>(m);
    double dot = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::Vector2d q = targets[i] - q_mean;
        const Eigen::Vector2d p = footholds[i] - p_mean;
        dot += q.dot(p);
        cross += q.x() * p.y() - q.y() * p.x();
    }
    pose.yaw = std::atan2(cross, dot);
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    pose.position.x() = p_mean.x() - (c * q_mean.x() - s * q_mean.y());
    pose.position.y() = p_mean.y() - (s * q_mean.x() + c * q_mean.y());
}

} // namespace

std::string_view to_string(Failure failure) noexcept {
    switch (failure) {
    case Failure::none: return "none";
    case Failure::fell: return "fell";
    case Failure::stuck: return "stuck";
    case Failure::unreachable: return "unreachable";
    case Failure::torque_exceeded: return "torque_exceeded";
    }
    return "unknown";
}

Failure parse_failure(std::string_view name) {
    for (Failure f : {Failure::none, Failure::fell, Failure::stuck, Failure::unreachable, Failure::torque_exceeded})
        if (to_string(f) == name) return f;
    throw ConfigError("failure", "unknown failure label '" + std::string(name) + "'");
}

void SimulationConfig::validate() const {
    if (!(control_rate > 0.0)) throw ConfigError("simulation.control_rate_hz", "must be positive");
    if (cycles < 1) throw ConfigError("simulation.cycles", "must be at least 1");
    if (warmup_cycles < 0 || warmup_cycles >= cycles)
        throw ConfigError("simulation.warmup_cycles", "must lie in [0, cycles)");
    if (fall_threshold && !(*fall_threshold > 0.0))
        throw ConfigError("simulation.fall_threshold_m", "must be positive");
}

SimulationTrace simulate(const RobotModel& robot, const GaitSchedule& schedule, const Terrain& terrain,
                         const SimulationConfig& config) {
    config.validate();
    const std::size_t n = robot.leg_count();
    if (schedule.leg_count() != n || schedule.strides.size() != n)
        throw StructuralError("simulate: schedule has " + std::to_string(schedule.leg_count()) + " legs, robot has " +
                              std::to_string(n));
    if (!(schedule.period > 0.0) || !std::isfinite(schedule.period))
        throw StructuralError("simulate: schedule period must be positive and finite");

    SimulationTrace trace;
    trace.leg_count = n;
    trace.period = schedule.period;
    trace.samples_per_cycle = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(schedule.period * config.control_rate)));
    trace.dt = schedule.period / static_cast<double>(trace.samples_per_cycle);
    trace.weight = robot.weight();
    trace.leg_length = robot.leg_length();
    const double dt = trace.dt;
    const double fall_threshold = config.fall_threshold.value_or(0.25 * trace.leg_length);
    const std::size_t total = trace.samples_per_cycle * static_cast<std::size_t>(config.cycles);
    const std::size_t window_start = trace.samples_per_cycle * static_cast<std::size_t>(config.warmup_cycles);
    const double standing_height = robot.posture.standing_height;
    const auto nominal = robot.nominal_footholds();
    // Descent speed of the sin(pi s) arc at s = 1; the horizontal ease ends at rest.
    const double touchdown_speed = std::numbers::pi * schedule.swing_height / schedule.swing_duration();

    trace.samples.reserve(total);
    if (config.record_detail) {
        trace.torques.reserve(total * robot.joint_count());
        trace.joint_force_norms.reserve(total * robot.joint_count());
    }

    BodyPose pose;
    double heading_c = 1.0;
    double heading_s = 0.0;
    auto refresh_heading = [&] {
        heading_c = std::cos(pose.yaw);
        heading_s = std::sin(pose.yaw);
    };
    auto to_plane = [&](const Eigen::Vector3d& body_point) -> Eigen::Vector2d {
        return {pose.position.x() + heading_c * body_point.x() - heading_s * body_point.y(),
                pose.position.y() + heading_s * body_point.x() + heading_c * body_point.y()};
    };
    auto to_body = [&](const Eigen::Vector3d& world) -> Eigen::Vector3d {
        const Eigen::Vector3d d = world - pose.position;
        return {heading_c * d.x() + heading_s * d.y(), -heading_s * d.x() + heading_c * d.y(), d.z()};
    };

    auto body_target = [&](std::size_t leg, const LegPhase& phase) {
        Eigen::Vector3d p = nominal[leg];
        p.x() += stride_offset(schedule, leg, phase);
        return p;
    };
    auto landing_target = [&](std::size_t leg) {
        Eigen::Vector3d p = nominal[leg];
        p.x() += 0.5 * schedule.strides[leg];
        return p;
    };

    // Unconstrained swing position: world-frame blend from the lift-off point
    // to the landing spot under the current pose, plus the swing arc.
    auto swing_position = [&](const LegState& s, std::size_t leg, const LegPhase& phase) {
        const Eigen::Vector3d land = on_ground(terrain, to_plane(landing_target(leg)));
        const double h = swing_ease(phase.horizontal);
        const double v = swing_ease(phase.vertical);
        Eigen::Vector3d p;
        p.head<2>() = s.lift.head<2>() + h * (land.head<2>() - s.lift.head<2>());
        p.z() = s.lift.z() + v * (land.z() - s.lift.z()) +
                schedule.swing_height * std::sin(std::numbers::pi * phase.vertical);
        return p;
    };

    // Initial placement at t = 0.
    {
        double ground = 0.0;
        for (const auto& f : nominal) ground += terrain.height_at(f.x(), f.y());
        pose.position = Eigen::Vector3d(0.0, 0.0, ground / static_cast<double>(n) + standing_height);
    }
    std::vector<LegState> legs(n);
    std::vector<LegPhase> phases(n);
    for (std::size_t i = 0; i < n; ++i) {
        phases[i] = leg_phase(schedule, i, 0.0);
        auto& s = legs[i];
        if (phases[i].stance) {
            s.stance = true;
            s.foothold = on_ground(terrain, to_plane(body_target(i, phases[i])));
            s.foot = s.foothold;
        } else {
            Eigen::Vector3d rear = nominal[i];
            rear.x() -= 0.5 * schedule.strides[i];
            s.lift = on_ground(terrain, to_plane(rear));
            s.foot = swing_position(s, i, phases[i]);
        }
    }

    const BodyPose initial_pose = pose;
    BodyPose window_pose = pose;
    std::size_t window_k = 0;
    std::size_t last_k = 0;

    std::vector<Eigen::Vector2d> fit_targets;
    std::vector<Eigen::Vector2d> fit_footholds;
    std::vector<std::size_t> fit_legs;
    std::vector<bool> touchdown(n);
    std::vector<LegGeometry> geometry(n);
    std::vector<Eigen::Vector3d> contact(n);
    std::vector<Eigen::Vector3d> stance_feet;
    std::vector<Eigen::Vector3d> stance_normals;
    std::vector<std::size_t> stance_legs;
    std::vector<Point2> ground_points;

    for (std::size_t k = 1; k <= total; ++k) {
        const double t = static_cast<double>(k) * dt;
        for (std::size_t i = 0; i < n; ++i) {
            phases[i] = leg_phase(schedule, i, t);
        }

        // Advance the body with the feet that stay planted.
        fit_targets.clear();
        fit_footholds.clear();
        fit_legs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (!(legs[i].stance && phases[i].stance)) continue;
            fit_targets.push_back(body_target(i, phases[i]).head<2>());
            fit_footholds.push_back(legs[i].foothold.head<2>());
            fit_legs.push_back(i);
        }
        fit_pose(pose, fit_targets, fit_footholds);
        refresh_heading();
        bool slipped = false;
        for (std::size_t c = 0; c < fit_legs.size(); ++c) {
            const Eigen::Vector3d target(fit_targets[c].x(), fit_targets[c].y(), 0.0);
            if ((to_plane(target) - fit_footholds[c]).norm() > kSlipTolerance) slipped = true;
        }
        trace.slip_samples += slipped ? 1 : 0;

        // Lift-off and touchdown events.
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = legs[i];
            touchdown[i] = false;
            if (s.stance && !phases[i].stance) {
                s.stance = false;
                s.blocked = false;
                s.lift = s.foothold;
            } else if (!s.stance && phases[i].stance) {
                s.stance = true;
                touchdown[i] = true;
                const Eigen::Vector2d xy = s.blocked ? Eigen::Vector2d(s.foot.head<2>())
                                                     : to_plane(body_target(i, phases[i]));
                s.foothold = on_ground(terrain, xy);
            }
        }

        double support_height = 0.0;
        std::size_t stance_count = 0;
        for (const auto& s : legs) {
            if (!s.stance) continue;
            support_height += s.foothold.z();
            ++stance_count;
        }
        if (stance_count > 0) pose.position.z() = support_height / static_cast<double>(stance_count) + standing_height;

        // Foot positions: stance feet stay pinned, swing feet follow the arc
        // unless the terrain gets in the way.
        bool blocked = false;
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = legs[i];
            if (s.stance) {
                s.foot = s.foothold;
                continue;
            }
            Eigen::Vector3d p = swing_position(s, i, phases[i]);
            if (!s.blocked && p.z() < terrain.height_at(p.x(), p.y()) - kPenetrationTolerance) s.blocked = true;
            if (s.blocked) {
                p.head<2>() = s.foot.head<2>();
                p.z() = std::max(p.z(), terrain.height_at(p.x(), p.y()));
                blocked = true;
            }
            s.foot = p;
        }
        trace.blocked_samples += blocked ? 1 : 0;

        std::optional<std::size_t> unreachable_leg;
        for (std::size_t i = 0; i < n && !unreachable_leg; ++i) {
            const auto solution = solve_leg(robot.legs[i], to_body(legs[i].foot), robot.hips[i]);
            if (!solution) unreachable_leg = i;
            else geometry[i] = solution->geometry;
        }
        if (unreachable_leg) {
            // A foot held back by the terrain until the leg overstretches has hit an obstacle it cannot clear.
            trace.failure = legs[*unreachable_leg].blocked ? Failure::stuck : Failure::unreachable;
            trace.failure_sample = trace.samples.size();
            break;
        }

        SampleRecord rec;
        rec.t = t;
        rec.pose = pose;
        rec.com = compute_com(robot, geometry, pose);

        stance_feet.clear();
        stance_normals.clear();
        stance_legs.clear();
        ground_points.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (!legs[i].stance) continue;
            rec.stance_mask |= std::uint32_t{1} << i;
            stance_feet.push_back(legs[i].foothold);
            stance_normals.push_back(terrain.surface_normal(legs[i].foothold.x(), legs[i].foothold.y()));
            stance_legs.push_back(i);
            ground_points.push_back(legs[i].foothold.head<2>());
        }

        std::fill(contact.begin(), contact.end(), Eigen::Vector3d::Zero());
        if (stance_feet.empty()) {
            rec.support_margin = -trace.leg_length;
        } else {
            const auto hull = convex_hull(ground_points);
            rec.support_margin = signed_distance_to_hull(rec.com.head<2>(), hull);
            const auto solution =
                distribute_contact_forces(stance_feet, rec.com, trace.weight, stance_normals, rec.support_margin);
            rec.statically_feasible = solution.statically_feasible;
            rec.force_residual = solution.force_residual;
            rec.moment_residual = solution.moment_residual;
            bool sliding = false;
            for (std::size_t c = 0; c < stance_legs.size(); ++c) {
                const Eigen::Vector3d& f = solution.forces[c];
                contact[stance_legs[c]] = f;
                const double normal = f.dot(stance_normals[c]);
                const double tangential = (f - normal * stance_normals[c]).norm();
                if (tangential > terrain.friction * std::max(normal, 0.0)) sliding = true;
            }
            trace.friction_slip_samples += sliding ? 1 : 0;
        }
        trace.unbalanced_samples += rec.statically_feasible ? 0 : 1;

        for (std::size_t i = 0; i < n; ++i) {
            const auto& leg = robot.legs[i];
            Eigen::Vector3d force = contact[i];
            if (config.impact_proxy && touchdown[i]) {
                // Momentum of the distal link, at the arc's touchdown speed, stopped within one control step.
                const Eigen::Vector3d normal = terrain.surface_normal(legs[i].foot.x(), legs[i].foot.y());
                force += leg.link_masses[1] * touchdown_speed / dt * normal;
            }
            const Eigen::Vector3d body_force(heading_c * force.x() + heading_s * force.y(),
                                             -heading_s * force.x() + heading_c * force.y(), force.z());
            const auto reactions = joint_reaction_forces(leg, body_force);
            const auto tau = joint_torques(leg, geometry[i], body_force);
            for (std::size_t j = 0; j < kJointsPerLeg; ++j) {
                const double norm = reactions[j].norm();
                const double magnitude = std::abs(tau[j]);
                rec.joint_force_sum += norm;
                rec.max_abs_torque = std::max(rec.max_abs_torque, magnitude);
                if (magnitude > leg.torque_limit) {
                    trace.torque_exceeded = true;
                    trace.torque_violation += magnitude - leg.torque_limit;
                }
                if (config.record_detail) {
                    trace.torques.push_back(tau[j]);
                    trace.joint_force_norms.push_back(norm);
                }
            }
        }
        trace.max_abs_torque = std::max(trace.max_abs_torque, rec.max_abs_torque);
        trace.samples.push_back(rec);
        last_k = k;
        if (k == window_start) {
            window_pose = pose;
            window_k = k;
        }

        if (stance_feet.empty() || rec.support_margin < -fall_threshold) {
            trace.failure = Failure::fell;
            trace.failure_sample = trace.samples.size() - 1;
            break;
        }
    }

    // Objective window: the measured cycles, or everything recorded when the
    // run ended during warm-up.
    if (last_k > window_start) {
        trace.first_measured = window_start;
    } else {
        trace.first_measured = 0;
        window_pose = initial_pose;
        window_k = 0;
    }
    const BodyPose end_pose = trace.samples.empty() ? window_pose : trace.samples.back().pose;
    trace.measured_cycles = static_cast<double>(last_k - std::min(last_k, window_k)) /
                            static_cast<double>(trace.samples_per_cycle);
    if (trace.measured_cycles > 0.0) {
        trace.dx = (end_pose.position.x() - window_pose.position.x()) / trace.measured_cycles;
        trace.dy = (end_pose.position.y() - window_pose.position.y()) / trace.measured_cycles;
    }

    if (trace.failure == Failure::none && terrain.kind == TerrainKind::step && !trace.samples.empty() &&
        trace.samples.back().com.x() < terrain.step_edge_x + 0.5 * robot.body_length)
        trace.failure = Failure::stuck;
    if (trace.failure == Failure::none && trace.torque_exceeded) trace.failure = Failure::torque_exceeded;
    return trace;
}

} // namespace gaitopt
