#pragma once

// Run configuration: JSON files with unit-suffixed keys, environment
// overrides (GAITOPT_<SECTION>__<KEY>=value) and a stable content hash.

#include "gaitopt/evaluator.hpp"
#include "gaitopt/gait.hpp"
#include "gaitopt/nsga3.hpp"
#include "gaitopt/objectives.hpp"
#include "gaitopt/problem.hpp"
#include "gaitopt/robot.hpp"
#include "gaitopt/terrain.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gaitopt {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kEnvPrefix = "GAITOPT_";

struct RunConfig {
    // Path the morphology was loaded from, as written in the config; empty for inline morphologies.
    std::string morphology_file;
    RobotModel robot;
    GaitKind gait = GaitKind::trot;
    Terrain terrain;
    nsga3::EvolutionConfig optimizer;
    ObjectiveConstants constants;
    std::size_t objective_count = 3;
    SimulationConfig simulation;
    int jobs = 1;
    std::string output_dir = "out";

    std::uint64_t seed() const noexcept { return optimizer.seed; }
    GaitProblemSettings problem_settings() const;
    // Cross-field checks (gait vs leg count) plus every section's own validation.
    void validate() const;
};

// Morphology files: {name, leg_count, body{mass_kg, length_m, width_m}, leg{...}, posture{...}}.
RobotModel morphology_from_json(const nlohmann::json& j);
nlohmann::json morphology_to_json(const RobotModel& robot);
RobotModel load_morphology(const std::filesystem::path& path);

// Parses a config document. Relative morphology paths resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
// Serialized form with the morphology inlined; parses back to an identical config.
nlohmann::json run_config_to_json(const RunConfig& config);

using Environment = std::vector<std::pair<std::string, std::string>>;

// Environment variables of this process that carry the override prefix.
Environment prefixed_environment();

// Applies overrides in place: GAITOPT_OPTIMIZER__GENERATIONS=5 sets
// optimizer.generations. Values parse as JSON when possible, else as strings.
void apply_overrides(nlohmann::json& document, const Environment& overrides);

// Reads, overrides and validates a config file. Errors carry field paths.
RunConfig load_run_config(const std::filesystem::path& path, const Environment& overrides = {});

// Reads a JSON document, reporting parse errors with their byte offset.
nlohmann::json read_json_file(const std::filesystem::path& path);

// FNV-1a (64 bit, hex) of the canonical config JSON without jobs and output_dir.
std::string config_hash(const RunConfig& config);

// Morphology x gait x terrain sweep sharing one optimizer/objective/simulation setup.
struct MatrixCell {
    std::string morphology;  // robot name
    std::size_t leg_count = 0;
    GaitKind gait = GaitKind::trot;
    TerrainKind terrain = TerrainKind::flat;
    bool executed = true;
};

struct MatrixConfig {
    RunConfig base;
    std::vector<RobotModel> robots;
    std::vector<GaitKind> gaits;
    std::vector<Terrain> terrains;
    // (gait, terrain) pairs marked as not executed.
    std::vector<std::pair<GaitKind, TerrainKind>> skip;

    // Every compatible morphology/gait pair crossed with every terrain.
    std::vector<MatrixCell> cells() const;
    RunConfig cell_config(const MatrixCell& cell) const;
};

MatrixConfig load_matrix_config(const std::filesystem::path& path, const Environment& overrides = {});

} // namespace gaitopt
