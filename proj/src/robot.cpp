#include "gaitopt/robot.hpp"

#include "gaitopt/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace gaitopt {

namespace {

// Maps an angle to (-pi, pi].
double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (std::abs(a) > 3.0 * std::numbers::pi) a = std::remainder(a, two_pi);
    if (a > std::numbers::pi) return a - two_pi;
    if (a <= -std::numbers::pi) return a + two_pi;
    return a;
}

struct PlanarSolution {
    double hip_pitch;
    double knee;
    // Cosines and sines of the hip pitch and of the knee, derived without extra trig calls.
    double c2, s2, c3, s3;
};

// Two-link solve in the leg plane: u is the signed horizontal reach along the
// leg heading, z the height of the foot relative to the hip.
std::optional<PlanarSolution> solve_planar(const LegModel& leg, double u, double z) {
    const double l1 = leg.link_lengths[0];
    const double l2 = leg.link_lengths[1];
    const double d2 = u * u + z * z;
    double c = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    constexpr double tolerance = 1e-12;
    if (c > 1.0 + tolerance || c < -1.0 - tolerance) return std::nullopt;
    c = std::clamp(c, -1.0, 1.0);
    const double s = std::sqrt(1.0 - c * c);
    const double knee = std::acos(c);
    const double bx = l1 + l2 * c;
    const double by = l2 * s;

    // hip_pitch = alpha - beta with alpha = atan2(-z, u), beta = atan2(by, bx).
    const double r = std::sqrt(d2);
    const double rb = std::sqrt(bx * bx + by * by);
    double ca = 1.0, sa = 0.0, cb = 1.0, sb = 0.0;
    if (r > 0.0) {
        ca = u / r;
        sa = -z / r;
    }
    if (rb > 0.0) {
        cb = bx / rb;
        sb = by / rb;
    }
    const double c2 = ca * cb + sa * sb;
    const double s2 = sa * cb - ca * sb;
    return PlanarSolution{std::atan2(s2, c2), knee, c2, s2, c, s};
}

} // namespace

void LegModel::validate() const {
    for (double l : link_lengths)
        if (!(l > 0.0)) throw ConfigError("leg.link_lengths_m", "link lengths must be positive");
    for (double m : link_masses)
        if (!(m >= 0.0)) throw ConfigError("leg.link_masses_kg", "link masses must be non-negative");
    for (const auto& lim : joint_limits)
        if (!(lim.lower <= lim.upper)) throw ConfigError("leg.joint_limits_rad", "lower limit exceeds upper limit");
    if (!(torque_limit > 0.0)) throw ConfigError("leg.torque_limit_nm", "torque limit must be positive");
}

bool JointState::within(const LegModel& leg) const noexcept {
    for (std::size_t j = 0; j < kJointsPerLeg; ++j)
        if (!leg.joint_limits[j].contains(angles[j])) return false;
    return true;
}

double RobotModel::total_mass() const noexcept {
    double m = body_mass;
    for (const auto& leg : legs) m += leg.mass();
    return m;
}

double RobotModel::leg_length() const noexcept {
    double l = 0.0;
    for (const auto& leg : legs) l = std::max(l, leg.leg_length());
    return l;
}

std::vector<Eigen::Vector3d> RobotModel::nominal_footholds() const {
    std::vector<Eigen::Vector3d> out;
    out.reserve(legs.size());
    const std::size_t rows = legs.size() / 2;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const auto& hip = hips[i];
        const std::size_t row = i / 2;
        double splay = 0.0;
        if (row == 0) splay = posture.foot_splay;
        else if (row + 1 == rows) splay = -posture.foot_splay;
        const Eigen::Vector3d outward(std::cos(hip.yaw), std::sin(hip.yaw), 0.0);
        out.push_back(hip.position + posture.foot_reach * outward + Eigen::Vector3d(splay, 0.0, -posture.standing_height));
    }
    return out;
}

void RobotModel::validate() const {
    if (legs.size() != 4 && legs.size() != 6) throw ConfigError("leg_count", "leg count must be 4 or 6");
    if (hips.size() != legs.size()) throw ConfigError("hip_positions_m", "one hip per leg required");
    if (!(body_mass > 0.0)) throw ConfigError("body.mass_kg", "body mass must be positive");
    if (!(body_length > 0.0) || !(body_width > 0.0))
        throw ConfigError("body", "body dimensions must be positive");
    if (!(posture.standing_height > 0.0)) throw ConfigError("posture.standing_height_m", "must be positive");
    for (const auto& leg : legs) leg.validate();
    for (std::size_t i = 0; i + 1 < hips.size(); i += 2) {
        const auto& left = hips[i].position;
        const auto& right = hips[i + 1].position;
        if (std::abs(left.x() - right.x()) > 1e-12 || std::abs(left.y() + right.y()) > 1e-12 ||
            std::abs(left.z() - right.z()) > 1e-12 || !(left.y() > 0.0))
            throw ConfigError("hip_positions_m", "hips must be mirror-symmetric about the body axis, left first");
    }
}

RobotModel make_symmetric_robot(std::string name, std::size_t leg_count, double body_mass, double body_length,
                                double body_width, const LegModel& leg, const StandardPosture& posture) {
    if (leg_count != 4 && leg_count != 6) throw ConfigError("leg_count", "leg count must be 4 or 6");
    RobotModel robot;
    robot.name = std::move(name);
    robot.body_mass = body_mass;
    robot.body_length = body_length;
    robot.body_width = body_width;
    robot.posture = posture;
    const std::size_t rows = leg_count / 2;
    for (std::size_t row = 0; row < rows; ++row) {
        const double x = body_length / 2.0 - body_length * static_cast<double>(row) / static_cast<double>(rows - 1);
        for (int side : {1, -1}) {
            robot.legs.push_back(leg);
            HipMount mount;
            mount.position = Eigen::Vector3d(x, side * body_width / 2.0, 0.0);
            mount.yaw = side * std::numbers::pi / 2.0;
            robot.hips.push_back(mount);
        }
    }
    robot.validate();
    return robot;
}

RobotModel quadruped_preset() {
    return make_symmetric_robot("quad", 4, 2.4, 0.40, 0.30, LegModel{}, StandardPosture{});
}

RobotModel hexapod_preset() {
    return make_symmetric_robot("hex", 6, 3.6, 0.60, 0.30, LegModel{}, StandardPosture{});
}

Eigen::Vector3d BodyPose::rotate_to_world(const Eigen::Vector3d& v) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

Eigen::Vector3d BodyPose::rotate_to_body(const Eigen::Vector3d& v) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
}

Eigen::Vector3d BodyPose::to_world(const Eigen::Vector3d& p) const { return position + rotate_to_world(p); }

Eigen::Vector3d BodyPose::to_body(const Eigen::Vector3d& p) const { return rotate_to_body(p - position); }

LegGeometry leg_geometry(const LegModel& leg, const JointState& q, const HipMount& hip) {
    const double l1 = leg.link_lengths[0];
    const double l2 = leg.link_lengths[1];
    const double heading = hip.yaw + q.angles[0];
    const Eigen::Vector3d e(std::cos(heading), std::sin(heading), 0.0);
    const double s2 = std::sin(q.angles[1]);
    const double c2 = std::cos(q.angles[1]);
    const double s23 = std::sin(q.angles[1] + q.angles[2]);
    const double c23 = std::cos(q.angles[1] + q.angles[2]);
    const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();

    LegGeometry g;
    g.hip = hip.position;
    g.knee = hip.position + l1 * c2 * e - l1 * s2 * up;
    g.foot = g.knee + l2 * c23 * e - l2 * s23 * up;
    g.thigh_midpoint = 0.5 * (g.hip + g.knee);
    g.shank_midpoint = 0.5 * (g.knee + g.foot);
    g.pitch_axis = Eigen::Vector3d(-e.y(), e.x(), 0.0);
    return g;
}

Eigen::Matrix3d leg_jacobian(const LegGeometry& g) {
    Eigen::Matrix3d j;
    j.col(0) = Eigen::Vector3d::UnitZ().cross(g.foot - g.hip);
    j.col(1) = g.pitch_axis.cross(g.foot - g.hip);
    j.col(2) = g.pitch_axis.cross(g.foot - g.knee);
    return j;
}

Eigen::Vector3d forward_kinematics(const LegModel& leg, const JointState& q, const HipMount& hip) {
    return leg_geometry(leg, q, hip).foot;
}

std::optional<LegSolution> solve_leg(const LegModel& leg, const Eigen::Vector3d& target, const HipMount& hip) {
    const Eigen::Vector3d d = target - hip.position;
    const double reach = std::sqrt(d.x() * d.x() + d.y() * d.y());
    const double z = d.z();

    // Either face the target (positive reach) or face away and reach backwards.
    double yaw_forward = 0.0;
    Eigen::Vector3d facing(std::cos(hip.yaw), std::sin(hip.yaw), 0.0);
    if (reach > 1e-12) {
        yaw_forward = wrap_angle(std::atan2(d.y(), d.x()) - hip.yaw);
        facing = Eigen::Vector3d(d.x() / reach, d.y() / reach, 0.0);
    }
    const double yaw_backward = wrap_angle(yaw_forward + std::numbers::pi);

    for (const auto& [yaw, u, sign] : {std::tuple{yaw_forward, reach, 1.0}, std::tuple{yaw_backward, -reach, -1.0}}) {
        if (!leg.joint_limits[0].contains(yaw)) continue;
        const auto planar = solve_planar(leg, u, z);
        if (!planar) return std::nullopt;
        LegSolution out;
        out.joints = JointState{{yaw, planar->hip_pitch, planar->knee}};
        if (!out.joints.within(leg)) continue;

        const Eigen::Vector3d e = sign * facing;
        const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
        const double c23 = planar->c2 * planar->c3 - planar->s2 * planar->s3;
        const double s23 = planar->s2 * planar->c3 + planar->c2 * planar->s3;
        auto& g = out.geometry;
        g.hip = hip.position;
        g.knee = hip.position + leg.link_lengths[0] * (planar->c2 * e - planar->s2 * up);
        g.foot = g.knee + leg.link_lengths[1] * (c23 * e - s23 * up);
        g.thigh_midpoint = 0.5 * (g.hip + g.knee);
        g.shank_midpoint = 0.5 * (g.knee + g.foot);
        g.pitch_axis = Eigen::Vector3d(-e.y(), e.x(), 0.0);
        return out;
    }
    return std::nullopt;
}

std::optional<JointState> inverse_kinematics(const LegModel& leg, const Eigen::Vector3d& target,
                                             const HipMount& hip) {
    const auto solution = solve_leg(leg, target, hip);
    if (!solution) return std::nullopt;
    return solution->joints;
}

Eigen::Matrix3d leg_jacobian(const LegModel& leg, const JointState& q, const HipMount& hip) {
    const double l1 = leg.link_lengths[0];
    const double l2 = leg.link_lengths[1];
    const double heading = hip.yaw + q.angles[0];
    const double ch = std::cos(heading);
    const double sh = std::sin(heading);
    const double s2 = std::sin(q.angles[1]);
    const double c2 = std::cos(q.angles[1]);
    const double s23 = std::sin(q.angles[1] + q.angles[2]);
    const double c23 = std::cos(q.angles[1] + q.angles[2]);
    const double u = l1 * c2 + l2 * c23;

    Eigen::Matrix3d j;
    j.col(0) << -u * sh, u * ch, 0.0;
    const double du2 = -l1 * s2 - l2 * s23;
    const double dz2 = -(l1 * c2 + l2 * c23);
    j.col(1) << du2 * ch, du2 * sh, dz2;
    const double du3 = -l2 * s23;
    const double dz3 = -l2 * c23;
    j.col(2) << du3 * ch, du3 * sh, dz3;
    return j;
}

Eigen::Vector3d compute_com(const RobotModel& robot, std::span<const JointState> joints, const BodyPose& pose) {
    if (joints.size() != robot.leg_count()) throw StructuralError("compute_com: one joint state per leg required");
    std::vector<LegGeometry> legs;
    legs.reserve(joints.size());
    for (std::size_t i = 0; i < robot.leg_count(); ++i) legs.push_back(leg_geometry(robot.legs[i], joints[i], robot.hips[i]));
    return compute_com(robot, legs, pose);
}

Eigen::Vector3d compute_com(const RobotModel& robot, std::span<const LegGeometry> legs, const BodyPose& pose) {
    if (legs.size() != robot.leg_count()) throw StructuralError("compute_com: one leg geometry per leg required");
    // The body centroid is the body-frame origin and contributes nothing to the weighted sum.
    Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
    double mass = robot.body_mass;
    for (std::size_t i = 0; i < robot.leg_count(); ++i) {
        const auto& leg = robot.legs[i];
        weighted += leg.link_masses[0] * legs[i].thigh_midpoint + leg.link_masses[1] * legs[i].shank_midpoint;
        mass += leg.mass();
    }
    return pose.to_world(weighted / mass);
}

} // namespace gaitopt
