#include "gaitopt/cli.hpp"

#include "gaitopt/error.hpp"
#include "gaitopt/problem.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <sstream>

namespace gaitopt::cli {

namespace {

std::vector<double> parse_genome(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        try {
            out.push_back(parse_double(item));
        } catch (const ConfigError&) {
            throw ConfigError("genome[" + std::to_string(out.size()) + "]", "not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("genome", "empty genome");
    return out;
}

std::string cell_name(const MatrixCell& c) {
    return c.morphology + "_" + std::string(to_string(c.gait)) + "_" + std::string(to_string(c.terrain));
}

std::vector<ArchiveEntry> population_entries(const GaitProblem& problem, std::span<const nsga3::Individual> population) {
    std::vector<ArchiveEntry> out;
    out.reserve(population.size());
    for (const auto& ind : population) out.push_back(problem.make_entry(ind));
    return out;
}

} // namespace

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const BoundError& e) {
        err << "error: genome out of bounds: " << e.what() << "\n";
        return input_error;
    } catch (const AnalysisError& e) {
        err << "error: insufficient data: " << e.what() << "\n";
        return insufficient_data;
    } catch (const EvaluationError& e) {
        err << "error: evaluation failed: " << e.what() << "\n";
        return evaluation_failure;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::exception& e) {
        err << "error: internal failure: " << e.what() << "\n";
        return evaluation_failure;
    }
}

ArchiveMetadata archive_metadata(const RunConfig& config) {
    ArchiveMetadata m;
    m.gait = std::string(to_string(config.gait));
    m.terrain = std::string(to_string(config.terrain.kind));
    m.morphology = config.robot.name;
    m.seed = config.seed();
    m.config_hash = config_hash(config);
    m.objective_count = static_cast<int>(config.objective_count);
    m.version = kVersion;
    return m;
}

Provenance provenance(const RunConfig& config) { return {kVersion, config_hash(config), config.seed()}; }

namespace {

// Optimization without file output; shared by optimize, matrix and compare.
struct Run {
    OptimizeOutput output;
    std::vector<ArchiveEntry> final_population;
};

Run run_optimization(const RunConfig& config) {
    config.validate();
    const GaitProblem problem(config.problem_settings());
    Run run;
    const std::size_t population_size = static_cast<std::size_t>(config.optimizer.population_size);
    auto observer = [&](int generation, std::span<const nsga3::Individual> population) {
        const auto members = population_entries(problem, population);
        run.output.generations.push_back(generation_record(generation, population_size, members));
    };
    auto result = optimize_gait(problem, config.optimizer, config.jobs, observer);
    run.output.archive = {archive_metadata(config), std::move(result.archive)};
    run.final_population = population_entries(problem, result.result.population);
    return run;
}

void write_optimization(const RunConfig& config, const OptimizeOutput& o, const std::filesystem::path& out) {
    const auto p = provenance(config);
    write_archive(out / "archive.json", o.archive);
    write_text_file(out / "generations.csv", to_csv(generations_table(p, o.generations)));
    write_text_file(out / "pareto.csv", to_csv(pareto_table(p, o.archive)));
    write_text_file(out / "config.json", run_config_to_json(config).dump(2) + "\n");
}

} // namespace

OptimizeOutput cmd_optimize(const RunConfig& config, const std::filesystem::path& out) {
    auto run = run_optimization(config);
    write_optimization(config, run.output, out);
    return std::move(run.output);
}

EvalOutput cmd_eval(const RunConfig& config, const std::vector<double>& genome, const std::filesystem::path& out) {
    config.validate();
    const GaitProblem problem(config.problem_settings());
    if (genome.size() != problem.bounds().size())
        throw ConfigError("genome", "expected " + std::to_string(problem.bounds().size()) + " values, got " +
                                        std::to_string(genome.size()));
    validate_decision(genome_decode(genome, config.gait, config.robot.leg_count()), config.gait);
    auto outcome = problem.evaluate(genome, BoundsPolicy::enforce, true);
    EvalOutput result;
    result.entry = problem.make_entry(genome);
    result.trace = std::move(outcome.trace);
    const auto p = provenance(config);
    write_text_file(out / "summary.json", evaluation_summary(p, result.entry, result.trace).dump(2) + "\n");
    write_text_file(out / "trace.csv", to_csv(trace_table(p, result.trace)));
    return result;
}

std::vector<MatrixResult> cmd_matrix(const MatrixConfig& config, const std::filesystem::path& out) {
    const auto cells = config.cells();
    if (cells.empty()) throw ConfigError("matrix", "no morphology/gait/terrain combination to run");
    std::vector<MatrixResult> results;
    std::vector<std::pair<std::filesystem::path, ParetoArchive>> archives;
    for (const auto& cell : cells) {
        MatrixResult r;
        r.cell = cell;
        if (!cell.executed) {
            r.status = CellStatus::not_executed;
            results.push_back(r);
            continue;
        }
        try {
            const auto cfg = config.cell_config(cell);
            auto run = run_optimization(cfg);
            r.archive_size = run.output.archive.entries.size();
            // Best candidate: least constraint violation, then fastest.
            const auto best = std::min_element(run.final_population.begin(), run.final_population.end(),
                                               [](const ArchiveEntry& a, const ArchiveEntry& b) {
                                                   if (a.constraint_violation != b.constraint_violation)
                                                       return a.constraint_violation < b.constraint_violation;
                                                   return a.objectives.f_speed > b.objectives.f_speed;
                                               });
            r.best_failure = best->failure;
            r.best_speed = best->objectives.f_speed;
            r.status = best->feasible() && best->failure == Failure::none ? CellStatus::success : CellStatus::failure;
            archives.emplace_back(out / "cells" / cell_name(cell) / "archive.json", std::move(run.output.archive));
        } catch (const std::exception& e) {
            r.status = CellStatus::error;
            r.message = e.what();
        }
        results.push_back(r);
    }
    for (const auto& [path, archive] : archives) write_archive(path, archive);
    Provenance p;
    p.seed = config.base.seed();
    p.config_hash = "matrix";
    write_text_file(out / "matrix.txt", matrix_text(results));
    write_text_file(out / "matrix.csv", to_csv(matrix_table(p, results)));
    return results;
}

std::vector<RegressionReport> cmd_regress(const std::vector<std::filesystem::path>& archives, bool pooled,
                                          double alpha, const std::filesystem::path& out) {
    if (archives.empty()) throw ConfigError("archive", "no archive given");
    std::vector<ParetoArchive> loaded;
    for (const auto& path : archives) loaded.push_back(read_archive(path));

    std::vector<std::pair<std::string, RegressionReport>> reports;
    if (pooled) {
        std::vector<ArchiveEntry> all;
        for (const auto& a : loaded) all.insert(all.end(), a.entries.begin(), a.entries.end());
        reports.emplace_back("regression", regress_load(all, alpha));
    } else {
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            const std::string name = archives.size() == 1 ? "regression" : "regression_" + std::to_string(i);
            reports.emplace_back(name, regress_load(loaded[i], alpha));
        }
    }
    std::vector<RegressionReport> result;
    for (auto& [name, report] : reports) {
        write_text_file(out / (name + ".json"), regression_to_json(report).dump(2) + "\n");
        write_text_file(out / (name + ".txt"), regression_text(report));
        result.push_back(std::move(report));
    }
    return result;
}

ArchiveComparison cmd_compare(const ParetoArchive& with_load, const ParetoArchive& without_load,
                              const std::filesystem::path& out) {
    const auto c = compare_archives(with_load, without_load);
    write_text_file(out / "comparison.json", comparison_to_json(c).dump(2) + "\n");
    return c;
}

ArchiveComparison cmd_compare_protocol(const RunConfig& config, const std::filesystem::path& out) {
    RunConfig with = config;
    with.objective_count = 3;
    RunConfig without = config;
    without.objective_count = 2;
    auto a = run_optimization(with);
    auto b = run_optimization(without);
    const auto c = compare_archives(a.output.archive, b.output.archive);
    write_optimization(with, a.output, out / "with_load");
    write_optimization(without, b.output, out / "without_load");
    write_text_file(out / "comparison.json", comparison_to_json(c).dump(2) + "\n");
    return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-objective gait optimization for modular legged robots"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> objectives;
    std::optional<int> jobs;
    std::string out_dir;
    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--seed", seed, "Random seed, overrides the config");
        sub->add_option("--objectives", objectives, "Objective count, 2 or 3")->check(CLI::IsMember({2, 3}));
        sub->add_option("--jobs", jobs, "Parallel evaluations")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "Output directory, overrides the config");
    };

    auto* optimize = app.add_subcommand("optimize", "Optimize gait parameters");
    add_common(optimize, true);

    auto* eval = app.add_subcommand("eval", "Evaluate one candidate");
    add_common(eval, true);
    std::string genome_text;
    std::string archive_path;
    std::size_t index = 0;
    auto* genome_opt = eval->add_option("--genome", genome_text, "Comma-separated genome L..., V..., H, beta");
    auto* archive_opt = eval->add_option("--archive", archive_path, "Archive to take the candidate from");
    eval->add_option("--index", index, "Archive entry index")->needs(archive_opt);
    genome_opt->excludes(archive_opt);

    auto* matrix = app.add_subcommand("matrix", "Run a morphology x gait x terrain matrix");
    add_common(matrix, true);

    auto* regress = app.add_subcommand("regress", "Regress joint load on gait parameters");
    std::vector<std::string> regress_archives;
    bool pooled = false;
    double alpha = 0.05;
    regress->add_option("--archive", regress_archives, "Archive file(s)")->required();
    regress->add_flag("--pooled", pooled, "Fit one model over all archives");
    regress->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    regress->add_option("--out", out_dir, "Output directory");

    auto* compare = app.add_subcommand("compare", "Compare load-aware and load-blind archives");
    std::string with_path;
    std::string without_path;
    compare->add_option("--config", config_path, "Run the seed-matched protocol from this configuration");
    auto* with_opt = compare->add_option("--with", with_path, "Archive optimized with the load objective");
    auto* without_opt = compare->add_option("--without", without_path, "Archive optimized without it");
    with_opt->needs(without_opt);
    without_opt->needs(with_opt);
    compare->add_option("--seed", seed, "Random seed, overrides the config");
    compare->add_option("--jobs", jobs, "Parallel evaluations")->check(CLI::PositiveNumber);
    compare->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    const auto overrides = prefixed_environment();
    // The matrix base has no robot of its own; its cells are validated one by one.
    auto apply_flags = [&](RunConfig& c, bool validate = true) {
        if (seed) c.optimizer.seed = *seed;
        if (objectives) c.objective_count = static_cast<std::size_t>(*objectives);
        if (jobs) c.jobs = *jobs;
        if (!out_dir.empty()) c.output_dir = out_dir;
        if (validate) c.validate();
    };

    try {
        if (optimize->parsed()) {
            auto config = load_run_config(config_path, overrides);
            apply_flags(config);
            const auto result = cmd_optimize(config, config.output_dir);
            out << "archive: " << result.archive.entries.size() << " entries -> "
                << (std::filesystem::path(config.output_dir) / "archive.json").string() << "\n";
        } else if (eval->parsed()) {
            auto config = load_run_config(config_path, overrides);
            apply_flags(config);
            std::vector<double> genome;
            if (!genome_text.empty()) {
                genome = parse_genome(genome_text);
            } else if (!archive_path.empty()) {
                const auto archive = read_archive(archive_path);
                if (index >= archive.entries.size())
                    throw ConfigError("index", "archive has " + std::to_string(archive.entries.size()) + " entries");
                genome = archive.entries[index].genome;
            } else {
                throw ConfigError("genome", "pass --genome or --archive/--index");
            }
            const auto result = cmd_eval(config, genome, config.output_dir);
            out << "failure: " << to_string(result.entry.failure) << "  f_speed: " << format_double(result.entry.objectives.f_speed)
                << "  f_stability: " << format_double(result.entry.objectives.f_stability)
                << "  f_load: " << format_double(result.entry.objectives.f_load) << "\n";
        } else if (matrix->parsed()) {
            auto config = load_matrix_config(config_path, overrides);
            apply_flags(config.base, false);
            const auto results = cmd_matrix(config, config.base.output_dir);
            out << matrix_text(results);
        } else if (regress->parsed()) {
            std::vector<std::filesystem::path> paths(regress_archives.begin(), regress_archives.end());
            const auto reports = cmd_regress(paths, pooled, alpha, out_dir.empty() ? "." : out_dir);
            for (const auto& r : reports) out << regression_text(r);
        } else if (compare->parsed()) {
            ArchiveComparison c;
            if (!with_path.empty()) {
                if (!config_path.empty()) throw ConfigError("config", "use either --config or --with/--without");
                c = cmd_compare(read_archive(with_path), read_archive(without_path), out_dir.empty() ? "." : out_dir);
            } else {
                if (config_path.empty()) throw ConfigError("config", "pass --config or --with/--without");
                auto config = load_run_config(config_path, overrides);
                apply_flags(config);
                c = cmd_compare_protocol(config, config.output_dir);
            }
            out << comparison_to_json(c).dump(2) << "\n";
        }
    } catch (...) {
        return exit_code_for_current_exception(err);
    }
    return ok;
}

} // namespace gaitopt::cli
