#pragma once

// Quasi-static locomotion evaluation. The body is kept level and advanced by
// fitting a planar rigid transform to the pinned stance feet; contact forces,
// joint reactions and torques follow from static balance at every sample.

#include "gaitopt/gait.hpp"
#include "gaitopt/robot.hpp"
#include "gaitopt/terrain.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gaitopt {

enum class Failure { none, fell, stuck, unreachable, torque_exceeded };

std::string_view to_string(Failure failure) noexcept;
Failure parse_failure(std::string_view name);

struct SimulationConfig {
    double control_rate = 240.0;  // Hz
    int cycles = 3;
    int warmup_cycles = 1;        // excluded from the objective window
    // Signed support margin below -fall_threshold counts as a fall; unset means 0.25 * leg length.
    std::optional<double> fall_threshold;
    bool impact_proxy = true;
    // Keep per-joint torques and reaction-force magnitudes for every sample.
    bool record_detail = false;

    void validate() const;
};

struct SampleRecord {
    double t = 0.0;
    BodyPose pose;
    Eigen::Vector3d com = Eigen::Vector3d::Zero();
    std::uint32_t stance_mask = 0;  // bit i set when leg i is in stance
    double support_margin = 0.0;    // signed distance of the CoM projection to the support polygon
    bool statically_feasible = false;
    double force_residual = 0.0;
    double moment_residual = 0.0;
    double joint_force_sum = 0.0;   // sum over joints of |F_j|
    double max_abs_torque = 0.0;
};

struct SimulationTrace {
    std::vector<SampleRecord> samples;
    // Row-major [sample][leg * 3 + joint]; filled only with record_detail.
    std::vector<double> torques;
    std::vector<double> joint_force_norms;

    double period = 0.0;
    double dt = 0.0;
    std::size_t samples_per_cycle = 0;
    std::size_t leg_count = 0;
    // Samples [first_measured, samples.size()) form the objective window.
    std::size_t first_measured = 0;
    // Body displacement per cycle over the objective window.
    double dx = 0.0;
    double dy = 0.0;
    double measured_cycles = 0.0;

    Failure failure = Failure::none;
    std::optional<std::size_t> failure_sample;
    bool torque_exceeded = false;
    double torque_violation = 0.0;  // sum over samples and joints of max(0, |tau| - tau_max)
    double max_abs_torque = 0.0;

    std::size_t slip_samples = 0;      // stance feet drifting from the rigid fit by more than 1e-6 m
    std::size_t friction_slip_samples = 0;  // some contact force outside the friction cone
    std::size_t blocked_samples = 0;   // swing feet held back by the terrain
    std::size_t unbalanced_samples = 0;  // CoM projection outside the support polygon
    double weight = 0.0;
    double leg_length = 0.0;

    std::size_t joint_count() const noexcept { return leg_count * kJointsPerLeg; }
    std::size_t measured_count() const noexcept { return samples.size() - first_measured; }
};

// Integrates `config.cycles` gait cycles at the control rate. Failures are
// reported in the trace; unreachable targets and falls end the run early. A
// leg overstretched while the terrain blocks its swing foot counts as stuck.
SimulationTrace simulate(const RobotModel& robot, const GaitSchedule& schedule, const Terrain& terrain,
                         const SimulationConfig& config = {});

} // namespace gaitopt
