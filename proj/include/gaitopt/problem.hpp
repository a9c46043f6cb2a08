#pragma once

// Binds a robot, gait, terrain and objective settings into an optimization
// problem over the gait genome.

#include "gaitopt/analysis.hpp"
#include "gaitopt/evaluator.hpp"
#include "gaitopt/gait.hpp"
#include "gaitopt/nsga3.hpp"
#include "gaitopt/objectives.hpp"
#include "gaitopt/robot.hpp"
#include "gaitopt/terrain.hpp"

#include <span>

namespace gaitopt {

struct GaitProblemSettings {
    RobotModel robot;
    GaitKind gait = GaitKind::trot;
    Terrain terrain;
    SimulationConfig simulation;
    ObjectiveConstants constants;
    // 3: (-speed, -stability, load); 2: (-speed, -stability).
    std::size_t objective_count = 3;
};

struct CandidateOutcome {
    DecisionVector decision;
    SimulationTrace trace;
    Assessment assessment;
};

class GaitProblem {
public:
    // Throws ConfigError on inconsistent settings (gait vs leg count, bad constants).
    explicit GaitProblem(GaitProblemSettings settings);

    const GaitProblemSettings& settings() const noexcept { return settings_; }
    const nsga3::Bounds& bounds() const noexcept { return bounds_; }
    std::size_t objective_count() const noexcept { return settings_.objective_count; }
    double nominal_margin() const noexcept { return d_nom_; }

    // Full evaluation. With BoundsPolicy::enforce an out-of-range genome throws BoundError.
    CandidateOutcome evaluate(std::span<const double> genome, BoundsPolicy policy = BoundsPolicy::enforce,
                              bool record_detail = false) const;

    // Optimizer callback: minimized objectives, violation and the archive summary as auxiliary values.
    nsga3::Evaluation operator()(std::span<const double> genome) const;

    ArchiveEntry make_entry(std::span<const double> genome) const;
    // Rebuilds an archive entry from an optimizer individual without re-simulating.
    ArchiveEntry make_entry(const nsga3::Individual& individual) const;

private:
    GaitProblemSettings settings_;
    nsga3::Bounds bounds_;
    double d_nom_ = 0.0;
};

// Runs NSGA-III on the problem and converts the final archive.
struct GaitOptimization {
    nsga3::OptimizationResult result;
    std::vector<ArchiveEntry> archive;
};

GaitOptimization optimize_gait(const GaitProblem& problem, const nsga3::EvolutionConfig& config, int jobs = 1,
                               const nsga3::GenerationObserver& observer = {});

} // namespace gaitopt
