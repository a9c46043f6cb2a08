#include "gaitopt/gait.hpp"

#include "gaitopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gaitopt {

namespace {

std::string indexed(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

void check_range(double value, double lo, double hi, const std::string& field) {
    if (!(value >= lo && value <= hi))
        throw BoundError(field, "value " + std::to_string(value) + " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
}

} // namespace

GaitKind parse_gait(std::string_view name) {
    if (name == "trot") return GaitKind::trot;
    if (name == "wave") return GaitKind::wave;
    if (name == "tetrapod") return GaitKind::tetrapod;
    if (name == "tripod") return GaitKind::tripod;
    throw ConfigError("gait", "unknown gait '" + std::string(name) + "' (expected trot|wave|tetrapod|tripod)");
}

std::string_view to_string(GaitKind gait) noexcept {
    switch (gait) {
    case GaitKind::trot: return "trot";
    case GaitKind::wave: return "wave";
    case GaitKind::tetrapod: return "tetrapod";
    case GaitKind::tripod: return "tripod";
    }
    return "unknown";
}

std::size_t required_leg_count(GaitKind gait) noexcept { return gait == GaitKind::trot ? 4 : 6; }

std::pair<double, double> duty_factor_range(GaitKind gait) noexcept {
    switch (gait) {
    case GaitKind::trot:
    case GaitKind::tripod: return {0.51, 0.70};
    case GaitKind::wave: return {0.84, 0.95};
    case GaitKind::tetrapod: return {0.67, 0.85};
    }
    return {0.0, 1.0};
}

std::size_t genome_length(std::size_t leg_count) noexcept { return 2 * leg_count + 2; }

nsga3::Bounds genome_bounds(GaitKind gait, std::size_t leg_count) {
    nsga3::Bounds b;
    for (std::size_t i = 0; i < leg_count; ++i) {
        b.lower.push_back(kStrideMin);
        b.upper.push_back(kStrideMax);
    }
    for (std::size_t i = 0; i < leg_count; ++i) {
        b.lower.push_back(kSwingSpeedMin);
        b.upper.push_back(kSwingSpeedMax);
    }
    b.lower.push_back(kSwingHeightMin);
    b.upper.push_back(kSwingHeightMax);
    const auto [lo, hi] = duty_factor_range(gait);
    b.lower.push_back(lo);
    b.upper.push_back(hi);
    return b;
}

std::vector<double> genome_encode(const DecisionVector& dv) {
    if (dv.strides.size() != dv.swing_speeds.size())
        throw StructuralError("genome_encode: stride and swing speed counts differ");
    std::vector<double> g;
    g.reserve(genome_length(dv.leg_count()));
    g.insert(g.end(), dv.strides.begin(), dv.strides.end());
    g.insert(g.end(), dv.swing_speeds.begin(), dv.swing_speeds.end());
    g.push_back(dv.swing_height);
    g.push_back(dv.duty_factor);
    return g;
}

DecisionVector genome_decode(std::span<const double> genome, GaitKind gait, std::size_t leg_count) {
    if (leg_count != required_leg_count(gait))
        throw ConfigError("gait", std::string(to_string(gait)) + " requires " +
                                      std::to_string(required_leg_count(gait)) + " legs");
    if (genome.size() != genome_length(leg_count))
        throw StructuralError("genome length " + std::to_string(genome.size()) + " does not match " +
                              std::to_string(genome_length(leg_count)) + " for " + std::to_string(leg_count) +
                              " legs");
    DecisionVector dv;
    dv.strides.assign(genome.begin(), genome.begin() + static_cast<std::ptrdiff_t>(leg_count));
    dv.swing_speeds.assign(genome.begin() + static_cast<std::ptrdiff_t>(leg_count),
                           genome.begin() + static_cast<std::ptrdiff_t>(2 * leg_count));
    dv.swing_height = genome[2 * leg_count];
    dv.duty_factor = genome[2 * leg_count + 1];
    return dv;
}

void validate_decision(const DecisionVector& dv, GaitKind gait) {
    for (std::size_t i = 0; i < dv.strides.size(); ++i) check_range(dv.strides[i], kStrideMin, kStrideMax, indexed("stride_m", i));
    for (std::size_t i = 0; i < dv.swing_speeds.size(); ++i)
        check_range(dv.swing_speeds[i], kSwingSpeedMin, kSwingSpeedMax, indexed("swing_speed_mps", i));
    check_range(dv.swing_height, kSwingHeightMin, kSwingHeightMax, "swing_height_m");
    const auto [lo, hi] = duty_factor_range(gait);
    check_range(dv.duty_factor, lo, hi, "duty_factor");
}

std::vector<double> phase_offsets(GaitKind gait) {
    switch (gait) {
    case GaitKind::trot:
        // Diagonal pairs {1,4} and {2,3}.
        return {0.0, 0.5, 0.5, 0.0};
    case GaitKind::tripod:
        // Groups {1,4,5} and {2,3,6}.
        return {0.0, 0.5, 0.5, 0.0, 0.0, 0.5};
    case GaitKind::wave:
        // Rear to front, left side then right side: 5, 3, 1, 6, 4, 2.
        return {2.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0, 0.0, 3.0 / 6.0};
    case GaitKind::tetrapod:
        // Pairs {3,6}, {1,4}, {2,5}.
        return {1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0};
    }
    return {};
}

double GaitSchedule::local_phase(std::size_t leg, double t) const noexcept {
    const double x = t / period - phase_offsets[leg];
    double psi = x - std::floor(x);
    if (psi >= 1.0) psi = 0.0;
    return psi;
}

bool GaitSchedule::in_stance(std::size_t leg, double t) const noexcept {
    return local_phase(leg, t) >= swing_fraction();
}

std::size_t GaitSchedule::stance_count(double t) const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < leg_count(); ++i) n += in_stance(i, t) ? 1 : 0;
    return n;
}

GaitSchedule build_schedule(GaitKind gait, std::size_t leg_count, const DecisionVector& dv, BoundsPolicy policy) {
    if (leg_count != required_leg_count(gait))
        throw ConfigError("gait", std::string(to_string(gait)) + " requires " +
                                      std::to_string(required_leg_count(gait)) + " legs, robot has " +
                                      std::to_string(leg_count));
    if (dv.strides.size() != leg_count || dv.swing_speeds.size() != leg_count)
        throw StructuralError("decision vector has " + std::to_string(dv.strides.size()) + " strides and " +
                              std::to_string(dv.swing_speeds.size()) + " swing speeds for " +
                              std::to_string(leg_count) + " legs");
    if (policy == BoundsPolicy::enforce) {
        validate_decision(dv, gait);
    } else {
        if (!(dv.duty_factor > 0.0 && dv.duty_factor < 1.0)) throw BoundError("duty_factor", "must lie in (0, 1)");
        for (std::size_t i = 0; i < leg_count; ++i) {
            if (!(dv.strides[i] > 0.0)) throw BoundError(indexed("stride_m", i), "must be positive");
            if (!(dv.swing_speeds[i] > 0.0)) throw BoundError(indexed("swing_speed_mps", i), "must be positive");
        }
        if (!(dv.swing_height >= 0.0)) throw BoundError("swing_height_m", "must be non-negative");
    }

    GaitSchedule s;
    s.gait = gait;
    s.phase_offsets = phase_offsets(gait);
    s.duty_factor = dv.duty_factor;
    s.strides = dv.strides;
    s.swing_speeds = dv.swing_speeds;
    s.swing_height = dv.swing_height;
    double slowest = 0.0;
    for (std::size_t i = 0; i < leg_count; ++i) slowest = std::max(slowest, dv.strides[i] / dv.swing_speeds[i]);
    s.period = slowest / (1.0 - dv.duty_factor);
    return s;
}

double swing_ease(double s) noexcept { return s * s * (3.0 - 2.0 * s); }

LegPhase leg_phase(const GaitSchedule& schedule, std::size_t leg, double t) noexcept {
    const double psi = schedule.local_phase(leg, t);
    const double swing = schedule.swing_fraction();
    LegPhase p;
    if (psi < swing) {
        p.stance = false;
        p.vertical = psi / swing;
        p.horizontal = std::min(psi * schedule.period / schedule.arc_duration(leg), 1.0);
    } else {
        p.stance = true;
        p.stance_progress = (psi - swing) / schedule.duty_factor;
    }
    return p;
}

double stride_offset(const GaitSchedule& schedule, std::size_t leg, const LegPhase& phase) noexcept {
    const double stride = schedule.strides[leg];
    if (phase.stance) return 0.5 * stride - stride * phase.stance_progress;
    return -0.5 * stride + stride * swing_ease(phase.horizontal);
}

Eigen::Vector3d foot_target(const GaitSchedule& schedule, std::size_t leg, double t,
                            const Eigen::Vector3d& nominal_foothold) {
    const auto phase = leg_phase(schedule, leg, t);
    Eigen::Vector3d p = nominal_foothold;
    p.x() += stride_offset(schedule, leg, phase);
    if (!phase.stance) p.z() += schedule.swing_height * std::sin(std::numbers::pi * phase.vertical);
    return p;
}

} // namespace gaitopt
