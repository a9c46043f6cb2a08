#include "gaitopt/analysis.hpp"

#include "gaitopt/error.hpp"
#include "gaitopt/nsga3.hpp"
#include "gaitopt/statistics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gaitopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double condition_number(const Eigen::MatrixXd& columns) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns);
    const auto& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smallest;
}

double sample_sd(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double relative_change(double with, double without) {
    if (without == 0.0) return with - without;
    return (with - without) / std::abs(without);
}

void require_same(const std::string& field, const std::string& a, const std::string& b) {
    if (a != b) throw ConfigError("metadata." + field, "archives differ ('" + a + "' vs '" + b + "')");
}

} // namespace

std::vector<ArchiveEntry> pareto_filter(std::span<const ArchiveEntry> entries) {
    std::vector<ArchiveEntry> kept;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].feasible()) continue;
        bool dominated = false;
        for (std::size_t j = 0; j < entries.size() && !dominated; ++j) {
            if (j == i || !entries[j].feasible()) continue;
            if (entries[j].minimized.size() != entries[i].minimized.size())
                throw StructuralError("pareto_filter: entries carry different objective counts");
            dominated = nsga3::pareto_dominates(entries[j].minimized, entries[i].minimized);
        }
        if (!dominated) kept.push_back(entries[i]);
    }
    return kept;
}

ParetoArchive pareto_filter(const ParetoArchive& archive) {
    return {archive.metadata, pareto_filter(archive.entries)};
}

std::string_view to_string(VariableGroup group) noexcept {
    switch (group) {
    case VariableGroup::duty_height: return "duty_height";
    case VariableGroup::strides: return "strides";
    case VariableGroup::speeds: return "speeds";
    }
    return "unknown";
}

RegressionReport ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                        const std::vector<std::string>& names,
                                        const std::vector<VariableGroup>& groups, double alpha) {
    const auto n = design.rows();
    const auto p = design.cols();
    if (response.size() != n) throw StructuralError("ordinary_least_squares: response length differs from design rows");
    if (static_cast<Eigen::Index>(names.size()) != p || static_cast<Eigen::Index>(groups.size()) != p)
        throw StructuralError("ordinary_least_squares: one name and group per column required");
    if (n <= p + 1)
        throw AnalysisError("regression needs more than " + std::to_string(p + 1) + " observations for " +
                            std::to_string(p) + " variables, got " + std::to_string(n));

    RegressionReport report;
    report.observations = static_cast<std::size_t>(n);
    report.alpha = alpha;
    report.intercept.name = "intercept";

    // Greedy alias detection on unit-norm columns, intercept first.
    std::vector<Eigen::Index> kept;
    Eigen::MatrixXd normalized(n, 1);
    normalized.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<bool> aliased(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double norm = design.col(j).norm();
        bool alias = !(norm > 0.0);
        if (!alias) {
            Eigen::MatrixXd trial(n, normalized.cols() + 1);
            trial << normalized, design.col(j) / norm;
            alias = condition_number(trial) > kAliasConditionLimit;
            if (!alias) normalized = std::move(trial);
        }
        aliased[static_cast<std::size_t>(j)] = alias;
        if (!alias) kept.push_back(j);
    }

    const auto q = static_cast<Eigen::Index>(kept.size()) + 1;
    Eigen::MatrixXd x(n, q);
    x.col(0).setOnes();
    for (Eigen::Index c = 1; c < q; ++c) x.col(c) = design.col(kept[static_cast<std::size_t>(c - 1)]);

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd residual = response - x * beta;
    const double rss = residual.squaredNorm();
    const double tss = (response.array() - response.mean()).square().sum();
    const auto dof = n - q;
    report.degrees_of_freedom = static_cast<std::size_t>(dof);
    const double sigma2 = rss / static_cast<double>(dof);

    const Eigen::MatrixXd r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(q, q));
    const Eigen::VectorXd unscaled_variance = (r_inv * r_inv.transpose()).diagonal();

    const double sd_y = sample_sd(response);
    auto fill = [&](RegressionTerm& term, Eigen::Index c, double sd_x) {
        term.coefficient = beta(c);
        term.standardized = sd_y > 0.0 ? beta(c) * sd_x / sd_y : 0.0;
        term.std_error = std::sqrt(sigma2 * unscaled_variance(c));
        if (term.std_error > 0.0) term.t_statistic = beta(c) / term.std_error;
        else term.t_statistic = beta(c) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), beta(c));
        term.p_value = stats::two_sided_p_value(term.t_statistic, static_cast<double>(dof));
        term.significant = term.p_value < alpha;
    };
    fill(report.intercept, 0, 0.0);
    report.intercept.standardized = 0.0;

    Eigen::Index column = 1;
    for (Eigen::Index j = 0; j < p; ++j) {
        RegressionTerm term;
        term.name = names[static_cast<std::size_t>(j)];
        term.group = groups[static_cast<std::size_t>(j)];
        term.aliased = aliased[static_cast<std::size_t>(j)];
        if (term.aliased) {
            term.coefficient = term.standardized = term.std_error = term.t_statistic = term.p_value = kNaN;
            report.notes.push_back(term.name + " is aliased with earlier columns and was left out of the fit");
        } else {
            fill(term, column++, sample_sd(design.col(j)));
        }
        report.terms.push_back(std::move(term));
    }

    if (tss > 0.0) {
        report.r_squared = std::clamp(1.0 - rss / tss, 0.0, 1.0);
    } else {
        report.degenerate = true;
        report.notes.push_back("response is constant; R^2 undefined and reported as 0");
    }
    if (kept.empty()) {
        report.degenerate = true;
        report.notes.push_back("every explanatory variable is aliased");
    }
    return report;
}

std::size_t minimum_observations(std::size_t leg_count) noexcept { return 2 * leg_count + 2 + 2; }

RegressionReport regress_load(std::span<const ArchiveEntry> entries, double alpha) {
    if (entries.empty()) throw AnalysisError("regression needs a non-empty archive");
    const std::size_t k = entries.front().decision.leg_count();
    for (const auto& e : entries)
        if (e.decision.leg_count() != k) throw StructuralError("regress_load: entries have different leg counts");
    if (entries.size() < minimum_observations(k))
        throw AnalysisError("regression needs at least " + std::to_string(minimum_observations(k)) +
                            " observations for " + std::to_string(2 * k + 2) + " variables, got " +
                            std::to_string(entries.size()));

    std::vector<const ArchiveEntry*> sorted;
    for (const auto& e : entries) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const ArchiveEntry* a, const ArchiveEntry* b) {
        const auto ga = genome_encode(a->decision);
        const auto gb = genome_encode(b->decision);
        if (ga != gb) return ga < gb;
        return a->objectives.f_load < b->objectives.f_load;
    });

    const auto n = static_cast<Eigen::Index>(sorted.size());
    const auto p = static_cast<Eigen::Index>(2 * k + 2);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& d = sorted[static_cast<std::size_t>(r)]->decision;
        x(r, 0) = d.duty_factor;
        x(r, 1) = d.swing_height;
        for (std::size_t i = 0; i < k; ++i) {
            x(r, 2 + static_cast<Eigen::Index>(i)) = d.strides[i];
            x(r, 2 + static_cast<Eigen::Index>(k + i)) = d.swing_speeds[i];
        }
        y(r) = sorted[static_cast<std::size_t>(r)]->objectives.f_load;
    }
    std::vector<std::string> names{"duty_factor", "swing_height_m"};
    std::vector<VariableGroup> groups{VariableGroup::duty_height, VariableGroup::duty_height};
    for (std::size_t i = 0; i < k; ++i) {
        names.push_back("stride_m[" + std::to_string(i) + "]");
        groups.push_back(VariableGroup::strides);
    }
    for (std::size_t i = 0; i < k; ++i) {
        names.push_back("swing_speed_mps[" + std::to_string(i) + "]");
        groups.push_back(VariableGroup::speeds);
    }
    return ordinary_least_squares(x, y, names, groups, alpha);
}

RegressionReport regress_load(const ParetoArchive& archive, double alpha) { return regress_load(archive.entries, alpha); }

ArchiveStatistics summarize(const ParetoArchive& archive) {
    std::vector<double> loads;
    ArchiveStatistics s;
    s.max_speed = -std::numeric_limits<double>::infinity();
    s.max_stability = -std::numeric_limits<double>::infinity();
    for (const auto& e : archive.entries) {
        if (!e.feasible()) continue;
        loads.push_back(e.objectives.f_load);
        s.max_speed = std::max(s.max_speed, e.objectives.f_speed);
        s.max_stability = std::max(s.max_stability, e.objectives.f_stability);
    }
    if (loads.empty()) throw AnalysisError("archive has no feasible entries");
    s.size = loads.size();
    s.min_load = *std::min_element(loads.begin(), loads.end());
    s.median_load = median(loads);
    return s;
}

ArchiveComparison compare_archives(const ParetoArchive& with_load, const ParetoArchive& without_load) {
    const auto& a = with_load.metadata;
    const auto& b = without_load.metadata;
    require_same("gait", a.gait, b.gait);
    require_same("terrain", a.terrain, b.terrain);
    require_same("morphology", a.morphology, b.morphology);
    require_same("seed", std::to_string(a.seed), std::to_string(b.seed));

    ArchiveComparison c;
    c.with_load = summarize(with_load);
    c.without_load = summarize(without_load);
    c.min_load_change = relative_change(c.with_load.min_load, c.without_load.min_load);
    c.median_load_change = relative_change(c.with_load.median_load, c.without_load.median_load);
    c.max_speed_change = relative_change(c.with_load.max_speed, c.without_load.max_speed);
    c.max_stability_change = relative_change(c.with_load.max_stability, c.without_load.max_stability);
    return c;
}

} // namespace gaitopt
