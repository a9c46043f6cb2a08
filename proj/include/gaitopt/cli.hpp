#pragma once

// Command implementations behind the gaitopt executable. Each command reads
// its inputs, computes everything in memory and writes its files at the end.

#include "gaitopt/analysis.hpp"
#include "gaitopt/config.hpp"
#include "gaitopt/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaitopt::cli {

enum ExitCode : int { ok = 0, input_error = 2, evaluation_failure = 3, insufficient_data = 4 };

// Maps the exception currently being handled to an exit code and writes a diagnostic.
int exit_code_for_current_exception(std::ostream& err);

struct OptimizeOutput {
    ParetoArchive archive;
    std::vector<GenerationRecord> generations;
};

ArchiveMetadata archive_metadata(const RunConfig& config);
Provenance provenance(const RunConfig& config);

// Runs NSGA-III and writes archive.json, generations.csv, pareto.csv and config.json into `out`.
OptimizeOutput cmd_optimize(const RunConfig& config, const std::filesystem::path& out);

struct EvalOutput {
    ArchiveEntry entry;
    SimulationTrace trace;
};

// Evaluates one genome and writes summary.json and trace.csv into `out`.
EvalOutput cmd_eval(const RunConfig& config, const std::vector<double>& genome, const std::filesystem::path& out);

// Runs every matrix cell, continuing past per-cell errors; writes matrix.txt,
// matrix.csv and one archive per executed cell.
std::vector<MatrixResult> cmd_matrix(const MatrixConfig& config, const std::filesystem::path& out);

// One report per archive, or a single report over all entries when pooled.
// Writes regression JSON and text files into `out`.
std::vector<RegressionReport> cmd_regress(const std::vector<std::filesystem::path>& archives, bool pooled,
                                          double alpha, const std::filesystem::path& out);

// Compares two existing archives and writes comparison.json.
ArchiveComparison cmd_compare(const ParetoArchive& with_load, const ParetoArchive& without_load,
                              const std::filesystem::path& out);

// Runs the seed-matched 3-objective and 2-objective optimizations of `config`
// into out/with_load and out/without_load, then compares them.
ArchiveComparison cmd_compare_protocol(const RunConfig& config, const std::filesystem::path& out);

// Parses the command line and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace gaitopt::cli
