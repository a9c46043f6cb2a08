#pragma once

// Pareto archive post-processing: non-dominated filtering, multiple linear
// regression of joint load on the gait parameters, and protocol comparison.

#include "gaitopt/evaluator.hpp"
#include "gaitopt/gait.hpp"
#include "gaitopt/objectives.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gaitopt {

struct ArchiveEntry {
    std::vector<double> genome;
    DecisionVector decision;
    ObjectiveVector objectives;
    // The objective values the optimizer minimized (two or three of them).
    std::vector<double> minimized;
    double constraint_violation = 0.0;
    Failure failure = Failure::none;
    // Trace summary.
    double dx = 0.0;
    double dy = 0.0;
    double period = 0.0;
    double max_abs_torque = 0.0;

    bool feasible() const noexcept { return constraint_violation <= 0.0; }
};

struct ArchiveMetadata {
    std::string gait;
    std::string terrain;
    std::string morphology;
    std::uint64_t seed = 0;
    std::string config_hash;
    int objective_count = 3;
    std::string version;
};

struct ParetoArchive {
    ArchiveMetadata metadata;
    std::vector<ArchiveEntry> entries;
};

// Feasible entries not dominated (on `minimized`) by any other feasible entry, in input order.
std::vector<ArchiveEntry> pareto_filter(std::span<const ArchiveEntry> entries);
ParetoArchive pareto_filter(const ParetoArchive& archive);

enum class VariableGroup { duty_height, strides, speeds };
std::string_view to_string(VariableGroup group) noexcept;

struct RegressionTerm {
    std::string name;
    VariableGroup group = VariableGroup::duty_height;
    // Aliased terms are linearly dependent on earlier columns; their statistics are undefined (NaN).
    bool aliased = false;
    double coefficient = 0.0;
    double standardized = 0.0;
    double std_error = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

struct RegressionReport {
    std::vector<RegressionTerm> terms;
    RegressionTerm intercept;
    double r_squared = 0.0;
    std::size_t observations = 0;
    std::size_t degrees_of_freedom = 0;
    double alpha = 0.05;
    // Set when the fit is not informative (constant response or every variable aliased).
    bool degenerate = false;
    std::vector<std::string> notes;
};

inline constexpr double kAliasConditionLimit = 1e10;

// OLS of `response` on the columns of `design` plus an intercept with
// two-sided t-tests. Columns whose addition pushes the column-normalized
// condition number above kAliasConditionLimit are flagged as aliased and left
// out of the fit. Throws AnalysisError unless rows > columns + 1.
RegressionReport ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                        const std::vector<std::string>& names,
                                        const std::vector<VariableGroup>& groups, double alpha = 0.05);

// Regresses f_load on [beta, H, L_1..L_k, V_1..V_k] over the entries, after
// sorting them canonically so the result does not depend on their order.
RegressionReport regress_load(std::span<const ArchiveEntry> entries, double alpha = 0.05);
RegressionReport regress_load(const ParetoArchive& archive, double alpha = 0.05);

// Minimum number of observations regress_load needs for `leg_count` legs.
std::size_t minimum_observations(std::size_t leg_count) noexcept;

struct ArchiveStatistics {
    std::size_t size = 0;
    double min_load = 0.0;
    double median_load = 0.0;
    double max_speed = 0.0;
    double max_stability = 0.0;
};

ArchiveStatistics summarize(const ParetoArchive& archive);

struct ArchiveComparison {
    ArchiveStatistics with_load;
    ArchiveStatistics without_load;
    // Relative change (with - without) / |without|; the plain difference when `without` is zero.
    double min_load_change = 0.0;
    double median_load_change = 0.0;
    double max_speed_change = 0.0;
    double max_stability_change = 0.0;
};

// Both archives must come from the same gait, terrain, morphology and seed.
// Load values of the speed/stability-only archive come from the same evaluator.
ArchiveComparison compare_archives(const ParetoArchive& with_load, const ParetoArchive& without_load);

} // namespace gaitopt
