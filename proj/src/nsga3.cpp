#include "gaitopt/nsga3.hpp"

#include "gaitopt/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace gaitopt::nsga3 {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void enumerate_lattice(std::vector<double>& current, std::size_t position, int remaining, int divisions,
                       std::vector<std::vector<double>>& out) {
    if (position + 1 == current.size()) {
        current[position] = static_cast<double>(remaining) / divisions;
        out.push_back(current);
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        current[position] = static_cast<double>(k) / divisions;
        enumerate_lattice(current, position + 1, remaining - k, divisions, out);
    }
}

double perpendicular_distance(std::span<const double> point, std::span<const double> direction) {
    double dot = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        dot += point[i] * direction[i];
        norm2 += direction[i] * direction[i];
    }
    const double scale = dot / norm2;
    double d2 = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double r = point[i] - scale * direction[i];
        d2 += r * r;
    }
    return std::sqrt(d2);
}

// Achievement scalarizing function used to locate extreme points.
double asf(std::span<const double> translated, std::size_t axis) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < translated.size(); ++j) {
        const double weight = j == axis ? 1.0 : 1e-6;
        worst = std::max(worst, translated[j] / weight);
    }
    return worst;
}

std::vector<double> intercepts_from(const std::vector<std::vector<double>>& extremes,
                                    const std::vector<std::vector<double>>& translated_front,
                                    const std::vector<std::vector<double>>& translated_all) {
    const std::size_t m = extremes.size();
    Eigen::MatrixXd e(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = extremes[i][j];

    std::vector<double> intercepts(m, 0.0);
    bool degenerate = false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(e);
    if (lu.rank() < static_cast<Eigen::Index>(m)) {
        degenerate = true;
    } else {
        const Eigen::VectorXd a = lu.solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
        for (std::size_t j = 0; j < m; ++j) {
            const double intercept = 1.0 / a(static_cast<Eigen::Index>(j));
            if (!std::isfinite(intercept) || intercept <= 1e-6) {
                degenerate = true;
                break;
            }
            intercepts[j] = intercept;
        }
    }
    if (!degenerate) return intercepts;

    // Fall back to the per-objective maximum of the first front, then of all members.
    for (std::size_t j = 0; j < m; ++j) {
        double worst = 0.0;
        for (const auto& f : translated_front) worst = std::max(worst, f[j]);
        if (worst <= 1e-6)
            for (const auto& f : translated_all) worst = std::max(worst, f[j]);
        intercepts[j] = worst > 1e-6 ? worst : 1.0;
    }
    return intercepts;
}

} // namespace

bool Bounds::contains(std::span<const double> genome) const noexcept {
    if (genome.size() != lower.size()) return false;
    for (std::size_t i = 0; i < genome.size(); ++i)
        if (!(genome[i] >= lower[i] && genome[i] <= upper[i])) return false;
    return true;
}

void Bounds::validate() const {
    if (lower.size() != upper.size())
        throw StructuralError("bounds: lower and upper have different lengths");
    if (lower.empty()) throw ParameterError("bounds: empty genome");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ParameterError("bounds: gene " + std::to_string(i) + " has an invalid range");
}

void EvolutionConfig::validate() const {
    if (population_size <= 0) throw ParameterError("population_size must be positive");
    if (generations <= 0) throw ParameterError("generations must be positive");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0))
        throw ParameterError("crossover_probability must lie in [0, 1]");
    if (!(crossover_eta > 0.0)) throw ParameterError("crossover_eta must be positive");
    if (mutation_probability && !(*mutation_probability >= 0.0 && *mutation_probability <= 1.0))
        throw ParameterError("mutation_probability must lie in [0, 1]");
    if (!(mutation_eta > 0.0)) throw ParameterError("mutation_eta must be positive");
}

std::uint64_t binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (unsigned i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

ReferencePointSet generate_reference_points(int objectives, int divisions) {
    if (objectives < 2) throw ParameterError("reference points need at least 2 objectives");
    if (divisions < 1) throw ParameterError("reference points need at least 1 division");
    ReferencePointSet set;
    set.divisions = divisions;
    set.points.reserve(binomial(static_cast<unsigned>(divisions + objectives - 1), static_cast<unsigned>(objectives - 1)));
    std::vector<double> current(static_cast<std::size_t>(objectives), 0.0);
    enumerate_lattice(current, 0, divisions, divisions, set.points);
    return set;
}

int divisions_for_population(int objectives, int population) {
    if (objectives < 2) throw ParameterError("reference points need at least 2 objectives");
    if (population < 1) throw ParameterError("population must be positive");
    int p = 1;
    while (binomial(static_cast<unsigned>(p + objectives - 1), static_cast<unsigned>(objectives - 1)) <
           static_cast<std::uint64_t>(population))
        ++p;
    return p;
}

bool pareto_dominates(std::span<const double> a, std::span<const double> b) noexcept {
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

bool constrained_dominates(const Individual& a, const Individual& b) {
    const bool fa = a.feasible();
    const bool fb = b.feasible();
    if (fa && !fb) return true;
    if (!fa && fb) return false;
    if (!fa && !fb && a.constraint_violation != b.constraint_violation)
        return a.constraint_violation < b.constraint_violation;
    return pareto_dominates(a.objectives, b.objectives);
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Individual> population) {
    const std::size_t n = population.size();
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) return fronts;
    const std::size_t m = population.front().objectives.size();
    for (const auto& ind : population)
        if (ind.objectives.size() != m)
            throw StructuralError("fast_nondominated_sort: individuals carry different objective counts");

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> counts(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (constrained_dominates(population[p], population[q])) {
                dominated[p].push_back(q);
                ++counts[q];
            } else if (constrained_dominates(population[q], population[p])) {
                dominated[q].push_back(p);
                ++counts[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p)
        if (counts[p] == 0) current.push_back(p);

    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current)
            for (std::size_t q : dominated[p])
                if (--counts[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<std::vector<std::size_t>> assign_ranks(std::span<Individual> population) {
    auto fronts = fast_nondominated_sort(population);
    for (std::size_t k = 0; k < fronts.size(); ++k)
        for (std::size_t i : fronts[k]) population[i].rank = static_cast<int>(k);
    return fronts;
}

std::pair<Genome, Genome> sbx_crossover(std::span<const double> parent_a, std::span<const double> parent_b,
                                        double eta, double probability, const Bounds& bounds, Rng& rng) {
    if (parent_a.size() != parent_b.size() || parent_a.size() != bounds.size())
        throw StructuralError("sbx_crossover: parent and bound lengths differ");
    Genome child_a(parent_a.begin(), parent_a.end());
    Genome child_b(parent_b.begin(), parent_b.end());
    if (uniform01(rng) >= probability) return {std::move(child_a), std::move(child_b)};

    const double exponent = 1.0 / (eta + 1.0);
    auto spread = [&](double beta, double u) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, exponent) : std::pow(1.0 / (2.0 - u * alpha), exponent);
    };

    for (std::size_t i = 0; i < child_a.size(); ++i) {
        if (uniform01(rng) > 0.5) continue;
        if (std::abs(parent_a[i] - parent_b[i]) <= 1e-14) continue;
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        const double y1 = std::min(parent_a[i], parent_b[i]);
        const double y2 = std::max(parent_a[i], parent_b[i]);
        const double u = uniform01(rng);

        const double beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        double c1 = 0.5 * ((y1 + y2) - spread(beta_lo, u) * (y2 - y1));
        const double beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        double c2 = 0.5 * ((y1 + y2) + spread(beta_hi, u) * (y2 - y1));

        c1 = std::clamp(c1, lo, hi);
        c2 = std::clamp(c2, lo, hi);
        if (uniform01(rng) <= 0.5) std::swap(c1, c2);
        child_a[i] = c1;
        child_b[i] = c2;
    }
    return {std::move(child_a), std::move(child_b)};
}

Genome polynomial_mutation(std::span<const double> genome, double eta, double probability,
                           const Bounds& bounds, Rng& rng) {
    if (genome.size() != bounds.size()) throw StructuralError("polynomial_mutation: genome and bound lengths differ");
    Genome out(genome.begin(), genome.end());
    const double exponent = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (uniform01(rng) >= probability) continue;
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        const double span = hi - lo;
        if (span <= 0.0) continue;
        const double y = out[i];
        const double delta1 = (y - lo) / span;
        const double delta2 = (hi - y) / span;
        const double u = uniform01(rng);
        double deltaq = 0.0;
        if (u < 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - delta1, eta + 1.0);
            deltaq = std::pow(val, exponent) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - delta2, eta + 1.0);
            deltaq = 1.0 - std::pow(val, exponent);
        }
        out[i] = std::clamp(y + deltaq * span, lo, hi);
    }
    return out;
}

std::vector<Individual> environmental_selection(std::vector<Individual> merged, const ReferencePointSet& refs,
                                                std::size_t count, Rng& rng, NormalizationState* state) {
    if (count > merged.size())
        throw ParameterError("environmental_selection: requested more survivors than candidates");
    if (refs.size() == 0) throw ParameterError("environmental_selection: empty reference point set");
    if (count == 0) return {};

    const auto fronts = assign_ranks(merged);
    std::vector<std::size_t> selected;
    std::size_t last = 0;
    for (; last < fronts.size(); ++last) {
        if (selected.size() + fronts[last].size() > count) break;
        selected.insert(selected.end(), fronts[last].begin(), fronts[last].end());
        if (selected.size() == count) break;
    }
    if (selected.size() == count) {
        std::vector<Individual> out;
        out.reserve(count);
        for (std::size_t i : selected) out.push_back(std::move(merged[i]));
        return out;
    }

    const auto& cut = fronts[last];
    std::vector<std::size_t> members = selected;
    members.insert(members.end(), cut.begin(), cut.end());

    const std::size_t m = merged.front().objectives.size();
    if (refs.dimension() != m) throw StructuralError("environmental_selection: reference dimension differs from objectives");

    // Running ideal point.
    std::vector<double> ideal(m, std::numeric_limits<double>::infinity());
    if (state && state->ideal.size() == m) ideal = state->ideal;
    for (std::size_t i : members)
        for (std::size_t j = 0; j < m; ++j) ideal[j] = std::min(ideal[j], merged[i].objectives[j]);

    auto translate = [&](const std::vector<double>& f) {
        std::vector<double> t(m);
        for (std::size_t j = 0; j < m; ++j) t[j] = f[j] - ideal[j];
        return t;
    };

    std::vector<std::vector<double>> translated;
    translated.reserve(members.size());
    for (std::size_t i : members) translated.push_back(translate(merged[i].objectives));

    std::vector<std::vector<double>> candidates_abs;
    for (std::size_t i : members) candidates_abs.push_back(merged[i].objectives);
    if (state && state->extremes.size() == m)
        for (const auto& e : state->extremes) candidates_abs.push_back(e);

    std::vector<std::vector<double>> extremes_abs(m);
    std::vector<std::vector<double>> extremes(m);
    for (std::size_t axis = 0; axis < m; ++axis) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_index = 0;
        for (std::size_t c = 0; c < candidates_abs.size(); ++c) {
            const double value = asf(translate(candidates_abs[c]), axis);
            if (value < best) {
                best = value;
                best_index = c;
            }
        }
        extremes_abs[axis] = candidates_abs[best_index];
        extremes[axis] = translate(candidates_abs[best_index]);
    }

    std::vector<std::vector<double>> translated_front;
    for (std::size_t i : fronts.front()) translated_front.push_back(translate(merged[i].objectives));
    const auto intercepts = intercepts_from(extremes, translated_front, translated);

    if (state) {
        state->ideal = ideal;
        state->extremes = extremes_abs;
    }

    // Associate every member with its nearest reference direction.
    std::vector<std::size_t> niche_of(members.size());
    std::vector<double> distance_of(members.size());
    std::vector<double> normalized(m);
    for (std::size_t k = 0; k < members.size(); ++k) {
        for (std::size_t j = 0; j < m; ++j) normalized[j] = translated[k][j] / intercepts[j];
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_ref = 0;
        for (std::size_t r = 0; r < refs.size(); ++r) {
            const double d = perpendicular_distance(normalized, refs.points[r]);
            if (d < best) {
                best = d;
                best_ref = r;
            }
        }
        niche_of[k] = best_ref;
        distance_of[k] = best;
        merged[members[k]].niche = best_ref;
    }

    std::vector<std::size_t> niche_count(refs.size(), 0);
    for (std::size_t k = 0; k < selected.size(); ++k) ++niche_count[niche_of[k]];

    // Cut-front bookkeeping: position k in `members` for each cut member.
    std::vector<bool> taken(members.size(), false);
    std::size_t remaining = count - selected.size();
    auto take = [&](std::size_t k) {
        taken[k] = true;
        ++niche_count[niche_of[k]];
        selected.push_back(members[k]);
        --remaining;
    };

    // Keep the per-objective best feasible individual when it sits in the cut front.
    const std::size_t cut_begin = members.size() - cut.size();
    for (std::size_t axis = 0; axis < m && remaining > 0; ++axis) {
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto& ind = merged[members[k]];
            if (!ind.feasible()) continue;
            if (!best || ind.objectives[axis] < merged[members[*best]].objectives[axis]) best = k;
        }
        if (best && *best >= cut_begin && !taken[*best]) take(*best);
    }

    std::vector<std::vector<std::size_t>> pool(refs.size());
    for (std::size_t k = cut_begin; k < members.size(); ++k)
        if (!taken[k]) pool[niche_of[k]].push_back(k);

    std::vector<bool> active(refs.size());
    for (std::size_t r = 0; r < refs.size(); ++r) active[r] = !pool[r].empty();

    while (remaining > 0) {
        std::size_t min_count = std::numeric_limits<std::size_t>::max();
        for (std::size_t r = 0; r < refs.size(); ++r)
            if (active[r]) min_count = std::min(min_count, niche_count[r]);
        std::vector<std::size_t> ties;
        for (std::size_t r = 0; r < refs.size(); ++r)
            if (active[r] && niche_count[r] == min_count) ties.push_back(r);
        const std::size_t ref = ties[uniform_index(rng, ties.size())];

        auto& candidates = pool[ref];
        std::size_t pick = 0;
        if (niche_count[ref] == 0) {
            for (std::size_t c = 1; c < candidates.size(); ++c)
                if (distance_of[candidates[c]] < distance_of[candidates[pick]]) pick = c;
        } else {
            pick = uniform_index(rng, candidates.size());
        }
        take(candidates[pick]);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        if (candidates.empty()) active[ref] = false;
    }

    std::vector<Individual> out;
    out.reserve(count);
    for (std::size_t i : selected) out.push_back(std::move(merged[i]));
    return out;
}

std::vector<Evaluation> evaluate_all(const Problem& problem, std::span<const Genome> genomes,
                                     std::size_t objective_count, int jobs, int generation) {
    const std::size_t n = genomes.size();
    std::vector<Evaluation> results(n);
    std::vector<std::exception_ptr> errors(n);

    auto run_one = [&](std::size_t i) {
        try {
            results[i] = problem(genomes[i]);
            if (results[i].objectives.size() != objective_count)
                throw StructuralError("callback returned " + std::to_string(results[i].objectives.size()) +
                                      " objectives, expected " + std::to_string(objective_count));
            for (double f : results[i].objectives)
                if (std::isnan(f)) throw EvaluationError("callback returned a NaN objective");
            if (std::isnan(results[i].constraint_violation) || results[i].constraint_violation < 0.0)
                throw EvaluationError("callback returned an invalid constraint violation");
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
            });
        for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        std::string what = "unknown error";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        throw EvaluationError("evaluation failed at generation " + std::to_string(generation) + ", index " +
                              std::to_string(i) + ": " + what);
    }
    return results;
}

namespace {

std::size_t binary_tournament(std::span<const Individual> population, Rng& rng) {
    const std::size_t a = uniform_index(rng, population.size());
    const std::size_t b = uniform_index(rng, population.size());
    const auto& ia = population[a];
    const auto& ib = population[b];
    if (ia.constraint_violation < ib.constraint_violation) return a;
    if (ib.constraint_violation < ia.constraint_violation) return b;
    return uniform01(rng) < 0.5 ? a : b;
}

} // namespace

OptimizationResult optimize(const Problem& problem, std::size_t objective_count, const EvolutionConfig& config,
                            const Bounds& bounds, int jobs, const GenerationObserver& observer) {
    config.validate();
    bounds.validate();
    if (objective_count < 2) throw ParameterError("optimize needs at least 2 objectives");

    const auto n_pop = static_cast<std::size_t>(config.population_size);
    const std::size_t n_genes = bounds.size();
    const double mutation_probability = config.mutation_probability.value_or(1.0 / static_cast<double>(n_genes));
    const auto refs = generate_reference_points(static_cast<int>(objective_count),
                                                divisions_for_population(static_cast<int>(objective_count),
                                                                         config.population_size));
    Rng rng(config.seed);

    std::vector<Genome> genomes(n_pop, Genome(n_genes));
    for (auto& g : genomes)
        for (std::size_t i = 0; i < n_genes; ++i)
            g[i] = std::uniform_real_distribution<double>(bounds.lower[i], bounds.upper[i])(rng);

    OptimizationResult result;
    auto evaluations = evaluate_all(problem, genomes, objective_count, jobs, 0);
    result.evaluations += n_pop;

    std::vector<Individual> population(n_pop);
    for (std::size_t i = 0; i < n_pop; ++i) {
        population[i].genome = std::move(genomes[i]);
        population[i].objectives = std::move(evaluations[i].objectives);
        population[i].constraint_violation = evaluations[i].constraint_violation;
        population[i].auxiliary = std::move(evaluations[i].auxiliary);
    }
    assign_ranks(population);
    if (observer) observer(0, population);

    NormalizationState state;
    for (int generation = 1; generation <= config.generations; ++generation) {
        std::vector<Genome> offspring;
        offspring.reserve(n_pop + 1);
        while (offspring.size() < n_pop) {
            const auto& a = population[binary_tournament(population, rng)];
            const auto& b = population[binary_tournament(population, rng)];
            auto [c1, c2] = sbx_crossover(a.genome, b.genome, config.crossover_eta, config.crossover_probability,
                                          bounds, rng);
            offspring.push_back(polynomial_mutation(c1, config.mutation_eta, mutation_probability, bounds, rng));
            if (offspring.size() < n_pop)
                offspring.push_back(polynomial_mutation(c2, config.mutation_eta, mutation_probability, bounds, rng));
        }

        auto child_evals = evaluate_all(problem, offspring, objective_count, jobs, generation);
        result.evaluations += n_pop;

        std::vector<Individual> merged = std::move(population);
        merged.reserve(2 * n_pop);
        for (std::size_t i = 0; i < n_pop; ++i) {
            Individual child;
            child.genome = std::move(offspring[i]);
            child.objectives = std::move(child_evals[i].objectives);
            child.constraint_violation = child_evals[i].constraint_violation;
            child.auxiliary = std::move(child_evals[i].auxiliary);
            merged.push_back(std::move(child));
        }
        population = environmental_selection(std::move(merged), refs, n_pop, rng, &state);
        assign_ranks(population);
        if (observer) observer(generation, population);
    }

    for (const auto& ind : population)
        if (ind.rank == 0 && ind.feasible()) result.archive.push_back(ind);
    result.population = std::move(population);
    return result;
}

} // namespace gaitopt::nsga3
