#include "gaitopt/problem.hpp"

#include "gaitopt/error.hpp"

#include <string>

namespace gaitopt {

namespace {

// Layout of the auxiliary values attached to each evaluation.
enum Auxiliary : std::size_t { aux_speed, aux_stability, aux_load, aux_dx, aux_dy, aux_period, aux_torque, aux_failure, aux_count };

} // namespace

GaitProblem::GaitProblem(GaitProblemSettings settings) : settings_(std::move(settings)) {
    settings_.robot.validate();
    settings_.terrain.validate();
    settings_.simulation.validate();
    settings_.constants.validate();
    if (settings_.objective_count != 2 && settings_.objective_count != 3)
        throw ConfigError("objectives.count", "must be 2 or 3");
    if (settings_.robot.leg_count() != required_leg_count(settings_.gait))
        throw ConfigError("gait", std::string(to_string(settings_.gait)) + " requires " +
                                      std::to_string(required_leg_count(settings_.gait)) + " legs, morphology '" +
                                      settings_.robot.name + "' has " + std::to_string(settings_.robot.leg_count()));
    bounds_ = genome_bounds(settings_.gait, settings_.robot.leg_count());
    d_nom_ = settings_.constants.d_nom.value_or(gaitopt::nominal_margin(settings_.robot));
    settings_.constants.d_nom = d_nom_;
}

CandidateOutcome GaitProblem::evaluate(std::span<const double> genome, BoundsPolicy policy, bool record_detail) const {
    CandidateOutcome out;
    out.decision = genome_decode(genome, settings_.gait, settings_.robot.leg_count());
    const auto schedule = build_schedule(settings_.gait, settings_.robot.leg_count(), out.decision, policy);
    auto sim = settings_.simulation;
    sim.record_detail = record_detail;
    out.trace = simulate(settings_.robot, schedule, settings_.terrain, sim);
    out.assessment = assess(out.trace, settings_.robot, settings_.constants);
    return out;
}

nsga3::Evaluation GaitProblem::operator()(std::span<const double> genome) const {
    const auto outcome = evaluate(genome, BoundsPolicy::enforce, false);
    nsga3::Evaluation e;
    e.objectives = outcome.assessment.objectives.minimization(settings_.objective_count);
    e.constraint_violation = outcome.assessment.constraint_violation;
    e.auxiliary.resize(aux_count);
    e.auxiliary[aux_speed] = outcome.assessment.objectives.f_speed;
    e.auxiliary[aux_stability] = outcome.assessment.objectives.f_stability;
    e.auxiliary[aux_load] = outcome.assessment.objectives.f_load;
    e.auxiliary[aux_dx] = outcome.trace.dx;
    e.auxiliary[aux_dy] = outcome.trace.dy;
    e.auxiliary[aux_period] = outcome.trace.period;
    e.auxiliary[aux_torque] = outcome.trace.max_abs_torque;
    e.auxiliary[aux_failure] = static_cast<double>(outcome.trace.failure);
    return e;
}

ArchiveEntry GaitProblem::make_entry(std::span<const double> genome) const {
    const auto outcome = evaluate(genome, BoundsPolicy::enforce, false);
    ArchiveEntry e;
    e.genome.assign(genome.begin(), genome.end());
    e.decision = outcome.decision;
    e.objectives = outcome.assessment.objectives;
    e.minimized = e.objectives.minimization(settings_.objective_count);
    e.constraint_violation = outcome.assessment.constraint_violation;
    e.failure = outcome.trace.failure;
    e.dx = outcome.trace.dx;
    e.dy = outcome.trace.dy;
    e.period = outcome.trace.period;
    e.max_abs_torque = outcome.trace.max_abs_torque;
    return e;
}

ArchiveEntry GaitProblem::make_entry(const nsga3::Individual& individual) const {
    if (individual.auxiliary.size() != aux_count) return make_entry(individual.genome);
    const auto& aux = individual.auxiliary;
    ArchiveEntry e;
    e.genome = individual.genome;
    e.decision = genome_decode(individual.genome, settings_.gait, settings_.robot.leg_count());
    e.objectives = {aux[aux_speed], aux[aux_stability], aux[aux_load]};
    e.minimized = individual.objectives;
    e.constraint_violation = individual.constraint_violation;
    e.failure = static_cast<Failure>(static_cast<int>(aux[aux_failure]));
    e.dx = aux[aux_dx];
    e.dy = aux[aux_dy];
    e.period = aux[aux_period];
    e.max_abs_torque = aux[aux_torque];
    return e;
}

GaitOptimization optimize_gait(const GaitProblem& problem, const nsga3::EvolutionConfig& config, int jobs,
                               const nsga3::GenerationObserver& observer) {
    GaitOptimization out;
    out.result = nsga3::optimize([&problem](std::span<const double> g) { return problem(g); },
                                 problem.objective_count(), config, problem.bounds(), jobs, observer);
    out.archive.reserve(out.result.archive.size());
    for (const auto& ind : out.result.archive) out.archive.push_back(problem.make_entry(ind));
    return out;
}

} // namespace gaitopt
