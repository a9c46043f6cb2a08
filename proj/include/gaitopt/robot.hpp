#pragma once

// Modular legged-robot morphology: yaw-pitch-pitch leg chains (one Twister
// and two Pivot modules per leg), kinematics and mass properties.
//
// Frames: body x forward, y left, z up, origin at the body centroid in the
// hip plane. Legs are numbered front to back with left legs at even indices
// (leg 1, 3, 5 in one-based numbering) and right legs at odd indices.

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gaitopt {

inline constexpr double kGravity = 9.81;
inline constexpr std::size_t kJointsPerLeg = 3;

struct JointLimits {
    double lower = 0.0;
    double upper = 0.0;
    bool contains(double angle) const noexcept { return angle >= lower && angle <= upper; }
};

struct LegModel {
    // Thigh (hip pitch to knee) and shank (knee to foot).
    std::array<double, 2> link_lengths{0.20, 0.20};
    std::array<double, 2> link_masses{0.25, 0.15};
    // Yaw, hip pitch, knee pitch.
    std::array<JointLimits, kJointsPerLeg> joint_limits{{{-1.4, 1.4}, {-2.6, 2.6}, {0.0, 2.9}}};
    double torque_limit = 12.0;

    double leg_length() const noexcept { return link_lengths[0] + link_lengths[1]; }
    double mass() const noexcept { return link_masses[0] + link_masses[1]; }
    void validate() const;
};

// Where a leg attaches: hip position in the body frame and the outward
// heading of the leg's zero pose about the body z axis.
struct HipMount {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    double yaw = 0.0;
};

// Yaw, hip pitch, knee pitch in radians. Positive pitch lowers the distal link.
struct JointState {
    std::array<double, kJointsPerLeg> angles{};

    bool within(const LegModel& leg) const noexcept;
};

// Standard posture: each foot `foot_reach` outward from its hip,
// `standing_height` below the hip plane, front and rear feet shifted
// `foot_splay` further fore/aft.
struct StandardPosture {
    double foot_reach = 0.10;
    double foot_splay = 0.016;
    double standing_height = 0.25;
};

struct RobotModel {
    std::string name;
    std::vector<LegModel> legs;
    std::vector<HipMount> hips;
    double body_mass = 0.0;
    double body_length = 0.0;
    double body_width = 0.0;
    StandardPosture posture;

    std::size_t leg_count() const noexcept { return legs.size(); }
    std::size_t joint_count() const noexcept { return legs.size() * kJointsPerLeg; }
    double total_mass() const noexcept;
    // W_robot = g * total mass.
    double weight() const noexcept { return kGravity * total_mass(); }
    // Longest leg; the length scale used by stability normalization and fall detection.
    double leg_length() const noexcept;
    // Body-frame nominal footholds of the standard posture.
    std::vector<Eigen::Vector3d> nominal_footholds() const;
    // Throws ConfigError on leg count, symmetry or geometry violations.
    void validate() const;
};

// Builds a laterally symmetric robot with `leg_count` identical legs spread
// evenly along the body length on both sides.
RobotModel make_symmetric_robot(std::string name, std::size_t leg_count, double body_mass, double body_length,
                                double body_width, const LegModel& leg, const StandardPosture& posture);

// Default presets; geometry and masses are placeholders that configs override.
RobotModel quadruped_preset();
RobotModel hexapod_preset();

// Planar rigid pose of the level body: world position of the body origin and heading.
struct BodyPose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    double yaw = 0.0;

    Eigen::Vector3d to_world(const Eigen::Vector3d& body_point) const;
    Eigen::Vector3d to_body(const Eigen::Vector3d& world_point) const;
    Eigen::Vector3d rotate_to_world(const Eigen::Vector3d& body_vector) const;
    Eigen::Vector3d rotate_to_body(const Eigen::Vector3d& world_vector) const;
};

// Knee position, link midpoints and foot of one leg in the body frame.
struct LegGeometry {
    Eigen::Vector3d hip;
    Eigen::Vector3d knee;
    Eigen::Vector3d foot;
    Eigen::Vector3d thigh_midpoint;
    Eigen::Vector3d shank_midpoint;
    // Shared axis of the hip and knee pitch joints; the yaw axis is body z.
    Eigen::Vector3d pitch_axis;
};

LegGeometry leg_geometry(const LegModel& leg, const JointState& q, const HipMount& hip);

// Jacobian assembled from joint axes and lever arms of an evaluated pose.
Eigen::Matrix3d leg_jacobian(const LegGeometry& geometry);

Eigen::Vector3d forward_kinematics(const LegModel& leg, const JointState& q, const HipMount& hip);

// Closed-form solve with the knee angle kept non-negative. Returns nullopt when
// the target lies outside the reachable annulus or the joint limits.
std::optional<JointState> inverse_kinematics(const LegModel& leg, const Eigen::Vector3d& target,
                                             const HipMount& hip);

struct LegSolution {
    JointState joints;
    LegGeometry geometry;
};

// Inverse kinematics that also returns the solved leg geometry.
std::optional<LegSolution> solve_leg(const LegModel& leg, const Eigen::Vector3d& target, const HipMount& hip);

// Column j is d(foot position)/d(angle j), body frame.
Eigen::Matrix3d leg_jacobian(const LegModel& leg, const JointState& q, const HipMount& hip);

// Mass-weighted mean of the body centroid and link midpoints, world frame.
Eigen::Vector3d compute_com(const RobotModel& robot, std::span<const JointState> joints, const BodyPose& pose);
Eigen::Vector3d compute_com(const RobotModel& robot, std::span<const LegGeometry> legs, const BodyPose& pose);

} // namespace gaitopt
