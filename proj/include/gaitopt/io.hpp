#pragma once

// File formats: archive JSON, generation log and Pareto CSVs, trace CSV,
// evaluation summary, regression reports, matrix tables and comparisons.
// Every writer has a matching reader. Doubles use the shortest
// decimal form that survives a round trip bit for bit.

#include "gaitopt/analysis.hpp"
#include "gaitopt/config.hpp"
#include "gaitopt/evaluator.hpp"
#include "gaitopt/objectives.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gaitopt {

// Provenance carried by every emitted file.
struct Provenance {
    std::string version = kVersion;
    std::string config_hash;
    std::uint64_t seed = 0;
};

std::string format_double(double value);
double parse_double(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// ---- archive ------------------------------------------------------------

nlohmann::json archive_to_json(const ParetoArchive& archive);
ParetoArchive archive_from_json(const nlohmann::json& j);
void write_archive(const std::filesystem::path& path, const ParetoArchive& archive);
// Throws ConfigError with the offending field path or parse location.
ParetoArchive read_archive(const std::filesystem::path& path);

// ---- CSV ----------------------------------------------------------------

struct CsvTable {
    std::string provenance;  // text after "# " on the first line, empty when absent
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

std::string provenance_line(const Provenance& p);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);

struct GenerationRecord {
    int generation = 0;
    std::size_t population = 0;
    std::size_t feasible = 0;
    // Over feasible members; NaN when there are none.
    double best_speed = 0.0;
    double median_speed = 0.0;
    double best_stability = 0.0;
    double median_stability = 0.0;
    double best_load = 0.0;
    double median_load = 0.0;
};

GenerationRecord generation_record(int generation, std::size_t population_size, std::span<const ArchiveEntry> members);
CsvTable generations_table(const Provenance& p, std::span<const GenerationRecord> records);
std::vector<GenerationRecord> generations_from_table(const CsvTable& table);

// Objective triples and decision variables for scatter plots.
CsvTable pareto_table(const Provenance& p, const ParetoArchive& archive);

// One row per sample; torque and joint-force columns appear when the trace kept them.
CsvTable trace_table(const Provenance& p, const SimulationTrace& trace);

// ---- evaluation summary -------------------------------------------------

nlohmann::json evaluation_summary(const Provenance& p, const ArchiveEntry& entry, const SimulationTrace& trace);

// ---- regression ---------------------------------------------------------

nlohmann::json regression_to_json(const RegressionReport& report);
RegressionReport regression_from_json(const nlohmann::json& j);
// Aligned-column table of coefficients and tests.
std::string regression_text(const RegressionReport& report);

// ---- comparison ---------------------------------------------------------

nlohmann::json comparison_to_json(const ArchiveComparison& c);
ArchiveComparison comparison_from_json(const nlohmann::json& j);

// ---- matrix -------------------------------------------------------------

enum class CellStatus { success, failure, not_executed, error };
std::string_view to_string(CellStatus status) noexcept;
CellStatus parse_cell_status(std::string_view name);

struct MatrixResult {
    MatrixCell cell;
    CellStatus status = CellStatus::not_executed;
    Failure best_failure = Failure::none;
    std::size_t archive_size = 0;
    double best_speed = 0.0;
    std::string message;
};

// Rows are legs x gait, columns terrains; o success, x failure, - not executed, ! error.
std::string matrix_text(std::span<const MatrixResult> results);
CsvTable matrix_table(const Provenance& p, std::span<const MatrixResult> results);
std::vector<MatrixResult> matrix_from_table(const CsvTable& table);

} // namespace gaitopt
