#pragma once

// Gait parameterization: decision vector {L, V, H, beta}, phase schedules
// for trot / wave / tetrapod / tripod, and per-leg foot trajectories.

#include "gaitopt/nsga3.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gaitopt {

enum class GaitKind { trot, wave, tetrapod, tripod };

GaitKind parse_gait(std::string_view name);
std::string_view to_string(GaitKind gait) noexcept;
std::size_t required_leg_count(GaitKind gait) noexcept;

// Duty-factor search range of each gait.
std::pair<double, double> duty_factor_range(GaitKind gait) noexcept;

inline constexpr double kStrideMin = 0.05;
inline constexpr double kStrideMax = 0.30;
inline constexpr double kSwingSpeedMin = 0.01;
inline constexpr double kSwingSpeedMax = 0.15;
inline constexpr double kSwingHeightMin = 0.10;
inline constexpr double kSwingHeightMax = 0.50;

struct DecisionVector {
    std::vector<double> strides;       // L_i, m
    std::vector<double> swing_speeds;  // V_i, m/s
    double swing_height = 0.0;         // H, m
    double duty_factor = 0.0;          // beta

    std::size_t leg_count() const noexcept { return strides.size(); }
    bool operator==(const DecisionVector&) const = default;
};

// Genome layout: [L_1..L_k, V_1..V_k, H, beta]; n = 2k + 2.
std::size_t genome_length(std::size_t leg_count) noexcept;
nsga3::Bounds genome_bounds(GaitKind gait, std::size_t leg_count);
std::vector<double> genome_encode(const DecisionVector& dv);
DecisionVector genome_decode(std::span<const double> genome, GaitKind gait, std::size_t leg_count);

// Throws BoundError naming the first offending field (e.g. "stride_m[2]").
void validate_decision(const DecisionVector& dv, GaitKind gait);

// Phase offsets of each leg (zero-based leg order).
std::vector<double> phase_offsets(GaitKind gait);

enum class BoundsPolicy { enforce, unchecked };

struct GaitSchedule {
    GaitKind gait = GaitKind::trot;
    std::vector<double> phase_offsets;
    double duty_factor = 0.0;
    double period = 0.0;  // T, s
    std::vector<double> strides;
    std::vector<double> swing_speeds;
    double swing_height = 0.0;

    std::size_t leg_count() const noexcept { return phase_offsets.size(); }
    double swing_fraction() const noexcept { return 1.0 - duty_factor; }
    double swing_duration() const noexcept { return swing_fraction() * period; }
    // Time the foot needs to cover its stride at its swing speed.
    double arc_duration(std::size_t leg) const noexcept { return strides[leg] / swing_speeds[leg]; }
    // Position of leg `leg` inside its own cycle, in [0, 1); swing occupies [0, 1 - beta).
    double local_phase(std::size_t leg, double t) const noexcept;
    bool in_stance(std::size_t leg, double t) const noexcept;
    std::size_t stance_count(double t) const noexcept;
};

// T = max_i(L_i / V_i) / (1 - beta).
GaitSchedule build_schedule(GaitKind gait, std::size_t leg_count, const DecisionVector& dv,
                            BoundsPolicy policy = BoundsPolicy::enforce);

// Where a leg is within its cycle.
struct LegPhase {
    bool stance = false;
    // Swing: horizontal progress in [0, 1] (reaches 1 after L_i / V_i) and
    // vertical progress over the whole swing window in [0, 1).
    double horizontal = 0.0;
    double vertical = 0.0;
    // Stance: progress through the stance window in [0, 1).
    double stance_progress = 0.0;
};

LegPhase leg_phase(const GaitSchedule& schedule, std::size_t leg, double t) noexcept;

// Cubic ease 3s^2 - 2s^3 used for the horizontal swing profile.
double swing_ease(double s) noexcept;

// Fore-aft offset of the foot from its nominal foothold (travel direction +x).
double stride_offset(const GaitSchedule& schedule, std::size_t leg, const LegPhase& phase) noexcept;

// Body-frame foot target over flat ground: stance retracts linearly through
// the nominal foothold at mid-stance, swing follows a sin(pi s) arc of height H.
Eigen::Vector3d foot_target(const GaitSchedule& schedule, std::size_t leg, double t,
                            const Eigen::Vector3d& nominal_foothold);

} // namespace gaitopt
