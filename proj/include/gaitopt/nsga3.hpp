#pragma once

// Reference-point based many-objective evolutionary optimizer (NSGA-III)
// over box-bounded real-coded genomes, with feasibility-first constraint
// handling. All objectives are minimized.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gaitopt::nsga3 {

using Genome = std::vector<double>;
using Rng = std::mt19937_64;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const noexcept { return lower.size(); }
    bool contains(std::span<const double> genome) const noexcept;
    // Throws StructuralError / ParameterError on mismatched or inverted bounds.
    void validate() const;
};

struct ReferencePointSet {
    std::vector<std::vector<double>> points;
    int divisions = 0;

    std::size_t size() const noexcept { return points.size(); }
    std::size_t dimension() const noexcept { return points.empty() ? 0 : points.front().size(); }
};

struct Individual {
    Genome genome;
    std::vector<double> objectives;
    double constraint_violation = 0.0;
    int rank = 0;
    std::optional<std::size_t> niche;
    // Extra values returned by the problem, carried along untouched by selection.
    std::vector<double> auxiliary;

    bool feasible() const noexcept { return constraint_violation <= 0.0; }
};

struct EvolutionConfig {
    int population_size = 91;
    int generations = 10;
    double crossover_probability = 1.0;
    double crossover_eta = 30.0;
    // Per-gene mutation probability; unset means 1/n.
    std::optional<double> mutation_probability;
    double mutation_eta = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Binomial coefficient C(n, k) in 64-bit arithmetic.
std::uint64_t binomial(unsigned n, unsigned k);

// Das-Dennis simplex lattice: every M-tuple of multiples of 1/p summing to 1.
ReferencePointSet generate_reference_points(int objectives, int divisions);

// Smallest p whose lattice holds at least `population` points.
int divisions_for_population(int objectives, int population);

// Feasibility-first dominance. Feasible beats infeasible; two infeasible
// individuals compare by violation, falling back to Pareto dominance on equal
// violation; two feasible individuals compare by Pareto dominance.
bool constrained_dominates(const Individual& a, const Individual& b);

// Plain Pareto dominance on minimized objective vectors.
bool pareto_dominates(std::span<const double> a, std::span<const double> b) noexcept;

// Fronts of population indices, best first. Every index appears in exactly one front.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Individual> population);

// Runs the sort and stores each individual's front index in `rank`.
std::vector<std::vector<std::size_t>> assign_ranks(std::span<Individual> population);

// Simulated binary crossover (bounded form). Each gene pair is crossed with
// probability 1/2 once the pair is selected with probability `probability`;
// children are swapped with probability 1/2 and clamped to the bounds.
std::pair<Genome, Genome> sbx_crossover(std::span<const double> parent_a, std::span<const double> parent_b,
                                        double eta, double probability, const Bounds& bounds, Rng& rng);

// Bounded polynomial mutation; each gene mutates with probability `probability`.
Genome polynomial_mutation(std::span<const double> genome, double eta, double probability,
                           const Bounds& bounds, Rng& rng);

// Normalization state carried between generations (running ideal point and
// the previous extreme points).
struct NormalizationState {
    std::vector<double> ideal;
    std::vector<std::vector<double>> extremes;
};

// Picks `count` survivors from `merged`: whole fronts while they fit, then
// reference-point niching on the cut front. The per-objective best feasible
// members of the cut front are always kept.
std::vector<Individual> environmental_selection(std::vector<Individual> merged, const ReferencePointSet& refs,
                                                std::size_t count, Rng& rng,
                                                NormalizationState* state = nullptr);

struct Evaluation {
    std::vector<double> objectives;
    double constraint_violation = 0.0;
    std::vector<double> auxiliary;
};

// Must be deterministic for a fixed genome and safe to call concurrently.
using Problem = std::function<Evaluation(std::span<const double>)>;

// Called after initialization (generation 0) and after each generation's survivor selection.
using GenerationObserver = std::function<void(int generation, std::span<const Individual> population)>;

struct OptimizationResult {
    // Feasible members of the final population's first front.
    std::vector<Individual> archive;
    std::vector<Individual> population;
    std::size_t evaluations = 0;
};

// Evaluates `genomes` with up to `jobs` threads. Results are in input order.
std::vector<Evaluation> evaluate_all(const Problem& problem, std::span<const Genome> genomes,
                                     std::size_t objective_count, int jobs, int generation = 0);

OptimizationResult optimize(const Problem& problem, std::size_t objective_count, const EvolutionConfig& config,
                            const Bounds& bounds, int jobs = 1, const GenerationObserver& observer = {});

} // namespace gaitopt::nsga3
