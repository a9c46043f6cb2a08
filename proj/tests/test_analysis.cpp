#include "gaitopt/analysis.hpp"
#include "gaitopt/error.hpp"
#include "gaitopt/statistics.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace gaitopt;

namespace {

ArchiveEntry random_entry(std::mt19937_64& rng, GaitKind gait) {
    const std::size_t k = required_leg_count(gait);
    const auto b = genome_bounds(gait, k);
    std::vector<double> g(b.lower.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::uniform_real_distribution<double>(b.lower[i], b.upper[i])(rng);
    ArchiveEntry e;
    e.genome = g;
    e.decision = genome_decode(g, gait, k);
    return e;
}

ArchiveEntry objective_entry(double speed, double stability, double load, double violation = 0.0) {
    ArchiveEntry e;
    e.objectives = {speed, stability, load};
    e.minimized = e.objectives.minimization();
    e.constraint_violation = violation;
    return e;
}

bool dominates(const ArchiveEntry& a, const ArchiveEntry& b) {
    bool strict = false;
    for (std::size_t m = 0; m < a.minimized.size(); ++m) {
        if (a.minimized[m] > b.minimized[m]) return false;
        if (a.minimized[m] < b.minimized[m]) strict = true;
    }
    return strict;
}

ParetoArchive archive_of(std::vector<double> loads, std::string gait = "tetrapod") {
    ParetoArchive a;
    a.metadata.gait = std::move(gait);
    a.metadata.terrain = "flat";
    a.metadata.morphology = "hex";
    a.metadata.seed = 1;
    for (std::size_t i = 0; i < loads.size(); ++i)
        a.entries.push_back(objective_entry(0.1 * static_cast<double>(i), 0.5, loads[i]));
    return a;
}

} // namespace

TEST_SUITE("analysis.distributions") {
    TEST_CASE("t distribution matches the reference implementation") {
        for (double dof : {1.0, 2.0, 3.5, 10.0, 27.0, 79.0, 300.0})
            for (double t : {-40.0, -5.0, -2.0, -0.7, 0.0, 0.3, 1.96, 4.0, 12.0}) {
                const boost::math::students_t dist(dof);
                CHECK(std::abs(stats::student_t_cdf(t, dof) - boost::math::cdf(dist, t)) < 1e-10);
                const double ref = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
                CHECK(std::abs(stats::two_sided_p_value(t, dof) - ref) < 1e-10);
            }
    }

    TEST_CASE("regularized incomplete beta matches the reference implementation") {
        for (double a : {0.5, 1.0, 2.5, 10.0, 40.0})
            for (double b : {0.5, 1.0, 3.0, 15.0})
                for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0})
                    CHECK(std::abs(stats::incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
    }

    TEST_CASE("infinite statistics and invalid arguments") {
        CHECK(stats::two_sided_p_value(INFINITY, 5.0) == 0.0);
        CHECK(stats::two_sided_p_value(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK_THROWS_AS(stats::incomplete_beta(0.0, 1.0, 0.5), ParameterError);
        CHECK_THROWS_AS(stats::two_sided_p_value(1.0, 0.0), ParameterError);
    }
}

TEST_SUITE("analysis.regression") {
    TEST_CASE("coefficients and errors match the normal equations") {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const int rows = 40, cols = 5;
            Eigen::MatrixXd x(rows, cols);
            Eigen::VectorXd y(rows);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) x(r, c) = n(rng);
                y(r) = 0.5 + x.row(r).sum() * 0.3 + n(rng);
            }
            const auto rep = ordinary_least_squares(x, y, {"a", "b", "c", "d", "e"},
                                                    std::vector<VariableGroup>(cols, VariableGroup::strides));
            Eigen::MatrixXd xi(rows, cols + 1);
            xi << Eigen::VectorXd::Ones(rows), x;
            const Eigen::MatrixXd xtx_inv = (xi.transpose() * xi).inverse();
            const Eigen::VectorXd beta = xtx_inv * xi.transpose() * y;
            const double sigma2 = (y - xi * beta).squaredNorm() / (rows - cols - 1);
            CHECK(std::abs(rep.intercept.coefficient - beta(0)) < 1e-8);
            REQUIRE(rep.terms.size() == static_cast<std::size_t>(cols));
            for (int c = 0; c < cols; ++c) {
                const auto& term = rep.terms[static_cast<std::size_t>(c)];
                CHECK(std::abs(term.coefficient - beta(c + 1)) < 1e-8);
                CHECK(std::abs(term.std_error - std::sqrt(sigma2 * xtx_inv(c + 1, c + 1))) < 1e-8);
                CHECK(term.p_value >= 0.0);
                CHECK(term.p_value <= 1.0);
            }
            CHECK(rep.degrees_of_freedom == static_cast<std::size_t>(rows - cols - 1));
            CHECK(rep.r_squared >= 0.0);
            CHECK(rep.r_squared <= 1.0);
        }
    }

    TEST_CASE("load exactly 2H + 1 is recovered") {
        std::mt19937_64 rng(2);
        std::vector<ArchiveEntry> entries;
        for (int i = 0; i < 40; ++i) {
            auto e = random_entry(rng, GaitKind::trot);
            e.objectives.f_load = 2.0 * e.decision.swing_height + 1.0;
            entries.push_back(e);
        }
        const auto rep = regress_load(entries);
        REQUIRE(rep.terms.size() == 10);
        CHECK(rep.terms[1].name == "swing_height_m");
        CHECK(std::abs(rep.terms[1].coefficient - 2.0) < 1e-10);
        CHECK(rep.terms[1].p_value < 1e-10);
        CHECK(std::abs(rep.intercept.coefficient - 1.0) < 1e-10);
        for (std::size_t j = 0; j < rep.terms.size(); ++j)
            if (j != 1) CHECK(std::abs(rep.terms[j].coefficient) < 1e-10);
        CHECK(rep.terms[0].group == VariableGroup::duty_height);
        CHECK(rep.terms[2].group == VariableGroup::strides);
        CHECK(rep.terms[9].group == VariableGroup::speeds);
    }

    TEST_CASE("pure noise is significant about five percent of the time") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n(0.0, 1.0);
        std::size_t tests = 0, hits = 0;
        for (int rep = 0; rep < 300; ++rep) {
            std::vector<ArchiveEntry> entries;
            for (int i = 0; i < 91; ++i) {
                auto e = random_entry(rng, GaitKind::trot);
                e.objectives.f_load = n(rng);
                entries.push_back(e);
            }
            for (const auto& t : regress_load(entries).terms) {
                ++tests;
                hits += t.significant ? 1 : 0;
            }
        }
        const double rate = static_cast<double>(hits) / static_cast<double>(tests);
        // 3000 tests: binomial sd ~ 0.004.
        CHECK(rate > 0.035);
        CHECK(rate < 0.065);
    }

    TEST_CASE("an exactly collinear column is flagged aliased") {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n(0.0, 1.0);
        const int rows = 30;
        Eigen::MatrixXd x(rows, 3);
        Eigen::VectorXd y(rows);
        for (int r = 0; r < rows; ++r) {
            x(r, 0) = n(rng);
            x(r, 1) = n(rng);
            x(r, 2) = 2.0 * x(r, 0) - x(r, 1);
            y(r) = x(r, 0) + n(rng);
        }
        const std::vector<VariableGroup> g(3, VariableGroup::strides);
        const auto rep = ordinary_least_squares(x, y, {"a", "b", "c"}, g);
        CHECK_FALSE(rep.terms[0].aliased);
        CHECK_FALSE(rep.terms[1].aliased);
        CHECK(rep.terms[2].aliased);
        CHECK(std::isnan(rep.terms[2].coefficient));
        CHECK_FALSE(rep.terms[2].significant);
        CHECK_FALSE(rep.notes.empty());
        CHECK_FALSE(rep.degenerate);
    }

    TEST_CASE("identical genomes give a flagged degenerate report") {
        std::mt19937_64 rng(5);
        const auto base = random_entry(rng, GaitKind::trot);
        std::vector<ArchiveEntry> entries(20, base);
        for (std::size_t i = 0; i < entries.size(); ++i) entries[i].objectives.f_load = 1.0 + 0.01 * static_cast<double>(i % 3);
        const auto rep = regress_load(entries);
        CHECK(rep.degenerate);
        for (const auto& t : rep.terms) CHECK(t.aliased);
        // Constant response as well.
        for (auto& e : entries) e.objectives.f_load = 2.0;
        CHECK(regress_load(entries).degenerate);
    }

    TEST_CASE("observation order does not change the report") {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<ArchiveEntry> entries;
        for (int i = 0; i < 30; ++i) {
            auto e = random_entry(rng, GaitKind::tripod);
            e.objectives.f_load = e.decision.swing_height + 0.1 * n(rng);
            entries.push_back(e);
        }
        const auto a = regress_load(entries);
        for (int rep = 0; rep < 5; ++rep) {
            std::shuffle(entries.begin(), entries.end(), rng);
            const auto b = regress_load(entries);
            REQUIRE(a.terms.size() == b.terms.size());
            for (std::size_t j = 0; j < a.terms.size(); ++j) {
                CHECK(a.terms[j].coefficient == b.terms[j].coefficient);
                CHECK(a.terms[j].p_value == b.terms[j].p_value);
            }
            CHECK(a.r_squared == b.r_squared);
        }
    }

    TEST_CASE("too few observations is an analysis error") {
        CHECK(minimum_observations(4) == 12);
        CHECK(minimum_observations(6) == 16);
        std::mt19937_64 rng(7);
        std::vector<ArchiveEntry> entries;
        for (int i = 0; i < 11; ++i) {
            auto e = random_entry(rng, GaitKind::trot);
            e.objectives.f_load = static_cast<double>(i);
            entries.push_back(e);
        }
        CHECK_THROWS_AS(regress_load(entries), AnalysisError);
        entries.push_back(entries.back());
        entries.back().objectives.f_load = 0.5;
        CHECK_NOTHROW(regress_load(entries));
        CHECK_THROWS_AS(regress_load(std::vector<ArchiveEntry>{}), AnalysisError);
    }
}

TEST_SUITE("analysis.pareto") {
    TEST_CASE("a single entry survives") {
        const std::vector<ArchiveEntry> one{objective_entry(0.1, 0.2, 1.0)};
        CHECK(pareto_filter(one).size() == 1);
    }

    TEST_CASE("a strictly dominated chain keeps only its head") {
        std::vector<ArchiveEntry> chain;
        for (int i = 0; i < 5; ++i) chain.push_back(objective_entry(0.5 - 0.1 * i, 0.5 - 0.1 * i, 1.0 + i));
        const auto out = pareto_filter(chain);
        REQUIRE(out.size() == 1);
        CHECK(out[0].objectives.f_load == 1.0);
    }

    TEST_CASE("random triples match the pairwise oracle") {
        std::mt19937_64 rng(8);
        std::uniform_int_distribution<int> u(0, 9);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<ArchiveEntry> entries;
            for (int i = 0; i < 100 + 5 * trial; ++i)
                entries.push_back(objective_entry(u(rng) / 10.0, u(rng) / 10.0, u(rng) / 10.0, u(rng) == 0 ? 1.0 : 0.0));
            std::vector<std::size_t> expected;
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (!entries[i].feasible()) continue;
                bool dominated = false;
                for (std::size_t j = 0; j < entries.size() && !dominated; ++j)
                    dominated = entries[j].feasible() && dominates(entries[j], entries[i]);
                if (!dominated) expected.push_back(i);
            }
            const auto out = pareto_filter(entries);
            REQUIRE(out.size() == expected.size());
            for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].minimized == entries[expected[i]].minimized);
            for (const auto& a : out)
                for (const auto& b : out) CHECK_FALSE(dominates(a, b));
        }
    }
}

TEST_SUITE("analysis.compare") {
    TEST_CASE("identical archives show no change") {
        const auto a = archive_of({2.0, 2.5, 3.0});
        const auto c = compare_archives(a, a);
        CHECK(c.min_load_change == 0.0);
        CHECK(c.median_load_change == 0.0);
        CHECK(c.max_speed_change == 0.0);
        CHECK(c.max_stability_change == 0.0);
        CHECK(c.with_load.median_load == 2.5);
        CHECK(c.with_load.size == 3);
    }

    TEST_CASE("uniformly lower loads give the exact negative ratio") {
        const auto with = archive_of({1.0, 1.5, 1.8});
        const auto without = archive_of({2.0, 2.2, 4.0});
        const auto c = compare_archives(with, without);
        CHECK(c.min_load_change == doctest::Approx((1.0 - 2.0) / 2.0).epsilon(1e-15));
        CHECK(c.median_load_change == doctest::Approx((1.5 - 2.2) / 2.2).epsilon(1e-15));
        CHECK(c.min_load_change < 0.0);
    }

    TEST_CASE("infeasible entries are ignored") {
        auto a = archive_of({3.0, 2.0});
        a.entries.push_back(objective_entry(9.0, 9.0, 0.1, 5.0));
        const auto s = summarize(a);
        CHECK(s.size == 2);
        CHECK(s.min_load == 2.0);
        a.entries = {objective_entry(0, 0, 1, 1.0)};
        CHECK_THROWS_AS(summarize(a), AnalysisError);
    }

    TEST_CASE("mismatched protocols are rejected") {
        const auto a = archive_of({1.0});
        auto b = archive_of({1.0}, "wave");
        CHECK_THROWS_AS(compare_archives(a, b), ConfigError);
        b = a;
        b.metadata.seed = 2;
        CHECK_THROWS_AS(compare_archives(a, b), ConfigError);
        b = a;
        b.metadata.terrain = "step";
        CHECK_THROWS_AS(compare_archives(a, b), ConfigError);
    }
}
