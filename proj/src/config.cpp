#include "gaitopt/config.hpp"

#include "gaitopt/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

extern char** environ;

namespace gaitopt {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Message of a ConfigError without its path prefix.
std::string detail(const ConfigError& e) {
    const std::string what = e.what();
    return e.path().empty() ? what : what.substr(e.path().size() + 2);
}

// Re-raises a ConfigError with `prefix` prepended to its path.
[[noreturn]] void rethrow_under(const std::string& prefix, const ConfigError& e) {
    throw ConfigError(join(prefix, e.path()), detail(e));
}

// Walks one JSON object, tracking which keys were consumed so typos surface as errors.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    void allow(const std::string& key) { used_.insert(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(join(path_, key), "missing required key");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) {
        used_.insert(key);
        return has(key) ? number(key) : fallback;
    }
    std::optional<double> optional_number(const std::string& key, std::optional<double> fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        if (j_.at(key).is_null()) return std::nullopt;
        return number(key);
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) throw ConfigError(join(path_, key), "must be non-negative");
        throw ConfigError(join(path_, key), "expected an integer");
    }

    bool boolean(const std::string& key, bool fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key, std::size_t count) {
        const auto& v = raw(key);
        if (!v.is_array() || v.size() != count)
            throw ConfigError(join(path_, key), "expected an array of " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i) {
            if (!v[i].is_number()) throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Section child(const std::string& key) {
        raw(key);
        return Section(j_.at(key), join(path_, key));
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    // Rejects keys nobody asked for.
    void finish() const {
        for (const auto& item : j_.items())
            if (!used_.contains(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Runs a validator and prefixes the field path of any ConfigError it raises.
template <typename F>
void validate_under(const std::string& prefix, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        const auto& p = e.path();
        throw ConfigError(p.starts_with(prefix) ? p : join(prefix, p), detail(e));
    } catch (const ParameterError& e) {
        throw ConfigError(prefix, e.what());
    }
}

Terrain terrain_from(Section s) {
    Terrain t;
    try {
        t.kind = parse_terrain_kind(s.string("kind"));
    } catch (const ConfigError& e) {
        throw ConfigError(s.path("kind"), detail(e));
    }
    t.slope_deg = s.number("slope_deg", t.slope_deg);
    t.step_height = s.number("step_height_m", t.step_height);
    t.step_edge_x = s.number("step_edge_x_m", t.step_edge_x);
    t.friction = s.number("friction", t.friction);
    s.finish();
    return t;
}

json terrain_to_json(const Terrain& t) {
    return {{"kind", std::string(to_string(t.kind))},
            {"slope_deg", t.slope_deg},
            {"step_height_m", t.step_height},
            {"step_edge_x_m", t.step_edge_x},
            {"friction", t.friction}};
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Sections shared by run and matrix configs.
void read_shared(Section& root, RunConfig& c) {
    for (const char* key : {"optimizer", "objectives", "simulation"}) root.allow(key);
    if (root.has("optimizer")) {
        auto s = root.child("optimizer");
        auto& o = c.optimizer;
        o.population_size = static_cast<int>(s.integer("population_size", o.population_size));
        o.generations = static_cast<int>(s.integer("generations", o.generations));
        o.crossover_probability = s.number("crossover_probability", o.crossover_probability);
        o.crossover_eta = s.number("crossover_eta", o.crossover_eta);
        o.mutation_probability = s.optional_number("mutation_probability", o.mutation_probability);
        o.mutation_eta = s.number("mutation_eta", o.mutation_eta);
        s.finish();
    }
    if (root.has("objectives")) {
        auto s = root.child("objectives");
        const auto count = s.integer("count", static_cast<std::int64_t>(c.objective_count));
        if (count != 2 && count != 3) throw ConfigError("objectives.count", "must be 2 or 3");
        c.objective_count = static_cast<std::size_t>(count);
        auto& k = c.constants;
        k.v_ref = s.number("v_ref_mps", k.v_ref);
        k.lambda = s.number("lambda", k.lambda);
        k.d_nom = s.optional_number("d_nom_m", k.d_nom);
        k.failure_penalty = s.number("failure_penalty", k.failure_penalty);
        s.finish();
    }
    if (root.has("simulation")) {
        auto s = root.child("simulation");
        auto& m = c.simulation;
        m.control_rate = s.number("control_rate_hz", m.control_rate);
        m.cycles = static_cast<int>(s.integer("cycles", m.cycles));
        m.warmup_cycles = static_cast<int>(s.integer("warmup_cycles", m.warmup_cycles));
        m.fall_threshold = s.optional_number("fall_threshold_m", m.fall_threshold);
        m.impact_proxy = s.boolean("impact_proxy", m.impact_proxy);
        s.finish();
    }
    c.optimizer.seed = root.unsigned_integer("seed", c.optimizer.seed);
    c.jobs = static_cast<int>(root.integer("jobs", c.jobs));
    c.output_dir = root.string("output_dir", c.output_dir);
}

void validate_shared(const RunConfig& c) {
    validate_under("optimizer", [&] { c.optimizer.validate(); });
    validate_under("objectives", [&] { c.constants.validate(); });
    validate_under("simulation", [&] { c.simulation.validate(); });
    if (c.objective_count != 2 && c.objective_count != 3) throw ConfigError("objectives.count", "must be 2 or 3");
    if (c.jobs < 1) throw ConfigError("jobs", "must be at least 1");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

RobotModel resolve_morphology(Section& root, const std::filesystem::path& base_dir, std::string& file) {
    const auto& v = root.raw("morphology");
    if (v.is_string()) {
        file = v.get<std::string>();
        std::filesystem::path p(file);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!std::filesystem::exists(p)) throw ConfigError("morphology", "file not found: " + p.string());
        try {
            return load_morphology(p);
        } catch (const ConfigError& e) {
            rethrow_under("morphology", e);
        }
    }
    if (v.is_object()) {
        file.clear();
        try {
            return morphology_from_json(v);
        } catch (const ConfigError& e) {
            rethrow_under("morphology", e);
        }
    }
    throw ConfigError("morphology", "expected a file path or an object");
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

} // namespace

RobotModel morphology_from_json(const json& j) {
    Section root(j, "");
    const std::string name = root.string("name");
    const auto leg_count = root.integer("leg_count", 0);
    if (leg_count != 4 && leg_count != 6) throw ConfigError("leg_count", "leg count must be 4 or 6");

    auto body = root.child("body");
    const double mass = body.number("mass_kg");
    const double length = body.number("length_m");
    const double width = body.number("width_m");
    body.finish();

    LegModel leg;
    if (root.has("leg")) {
        auto s = root.child("leg");
        const auto lengths = s.numbers("link_lengths_m", 2);
        const auto masses = s.numbers("link_masses_kg", 2);
        leg.link_lengths = {lengths[0], lengths[1]};
        leg.link_masses = {masses[0], masses[1]};
        if (s.has("joint_limits_rad")) {
            const auto& limits = s.raw("joint_limits_rad");
            if (!limits.is_array() || limits.size() != kJointsPerLeg)
                throw ConfigError("leg.joint_limits_rad", "expected three [lower, upper] pairs");
            for (std::size_t i = 0; i < kJointsPerLeg; ++i) {
                const auto& pair = limits[i];
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                    throw ConfigError("leg.joint_limits_rad[" + std::to_string(i) + "]", "expected [lower, upper]");
                leg.joint_limits[i] = {pair[0].get<double>(), pair[1].get<double>()};
            }
        }
        leg.torque_limit = s.number("torque_limit_nm", leg.torque_limit);
        s.finish();
    }

    StandardPosture posture;
    if (root.has("posture")) {
        auto s = root.child("posture");
        posture.foot_reach = s.number("foot_reach_m", posture.foot_reach);
        posture.foot_splay = s.number("foot_splay_m", posture.foot_splay);
        posture.standing_height = s.number("standing_height_m", posture.standing_height);
        s.finish();
    }
    root.finish();
    return make_symmetric_robot(name, static_cast<std::size_t>(leg_count), mass, length, width, leg, posture);
}

json morphology_to_json(const RobotModel& robot) {
    if (robot.legs.empty()) throw ConfigError("morphology", "robot has no legs");
    const auto& leg = robot.legs.front();
    json limits = json::array();
    for (const auto& l : leg.joint_limits) limits.push_back({l.lower, l.upper});
    return {{"name", robot.name},
            {"leg_count", robot.leg_count()},
            {"body", {{"mass_kg", robot.body_mass}, {"length_m", robot.body_length}, {"width_m", robot.body_width}}},
            {"leg",
             {{"link_lengths_m", {leg.link_lengths[0], leg.link_lengths[1]}},
              {"link_masses_kg", {leg.link_masses[0], leg.link_masses[1]}},
              {"joint_limits_rad", limits},
              {"torque_limit_nm", leg.torque_limit}}},
            {"posture",
             {{"foot_reach_m", robot.posture.foot_reach},
              {"foot_splay_m", robot.posture.foot_splay},
              {"standing_height_m", robot.posture.standing_height}}}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

RobotModel load_morphology(const std::filesystem::path& path) { return morphology_from_json(read_json_file(path)); }

GaitProblemSettings RunConfig::problem_settings() const {
    GaitProblemSettings s;
    s.robot = robot;
    s.gait = gait;
    s.terrain = terrain;
    s.simulation = simulation;
    s.constants = constants;
    s.objective_count = objective_count;
    return s;
}

void RunConfig::validate() const {
    validate_under("morphology", [&] { robot.validate(); });
    validate_under("terrain", [&] { terrain.validate(); });
    validate_shared(*this);
    if (robot.leg_count() != required_leg_count(gait))
        throw ConfigError("gait", std::string(to_string(gait)) + " requires " +
                                      std::to_string(required_leg_count(gait)) + " legs, morphology '" + robot.name +
                                      "' has " + std::to_string(robot.leg_count()));
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    Section root(j, "");
    RunConfig c;
    c.robot = resolve_morphology(root, base_dir, c.morphology_file);
    // Informational copy written by the serializer.
    if (root.has("morphology_file") && c.morphology_file.empty()) {
        const auto& f = root.raw("morphology_file");
        if (!f.is_string()) throw ConfigError("morphology_file", "expected a string");
        c.morphology_file = f.get<std::string>();
    }
    root.allow("morphology_file");
    try {
        c.gait = parse_gait(root.string("gait"));
    } catch (const ConfigError& e) {
        throw ConfigError("gait", detail(e));
    }
    c.terrain = root.has("terrain") ? terrain_from(root.child("terrain")) : Terrain::flat();
    read_shared(root, c);
    root.finish();
    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c) {
    return {{"morphology", morphology_to_json(c.robot)},
            {"morphology_file", c.morphology_file},
            {"gait", std::string(to_string(c.gait))},
            {"terrain", terrain_to_json(c.terrain)},
            {"optimizer",
             {{"population_size", c.optimizer.population_size},
              {"generations", c.optimizer.generations},
              {"crossover_probability", c.optimizer.crossover_probability},
              {"crossover_eta", c.optimizer.crossover_eta},
              {"mutation_probability", optional_to_json(c.optimizer.mutation_probability)},
              {"mutation_eta", c.optimizer.mutation_eta}}},
            {"objectives",
             {{"count", c.objective_count},
              {"v_ref_mps", c.constants.v_ref},
              {"lambda", c.constants.lambda},
              {"d_nom_m", optional_to_json(c.constants.d_nom)},
              {"failure_penalty", c.constants.failure_penalty}}},
            {"simulation",
             {{"control_rate_hz", c.simulation.control_rate},
              {"cycles", c.simulation.cycles},
              {"warmup_cycles", c.simulation.warmup_cycles},
              {"fall_threshold_m", optional_to_json(c.simulation.fall_threshold)},
              {"impact_proxy", c.simulation.impact_proxy}}},
            {"seed", c.optimizer.seed},
            {"jobs", c.jobs},
            {"output_dir", c.output_dir}};
}

Environment prefixed_environment() {
    Environment out;
    const std::string prefix = kEnvPrefix;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq == std::string::npos || !entry.starts_with(prefix)) continue;
        out.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void apply_overrides(json& document, const Environment& overrides) {
    const std::string prefix = kEnvPrefix;
    for (const auto& [name, value] : overrides) {
        if (!name.starts_with(prefix)) continue;
        const std::string rest = name.substr(prefix.size());
        std::vector<std::string> keys;
        std::size_t start = 0;
        while (true) {
            const auto sep = rest.find("__", start);
            keys.push_back(lower(rest.substr(start, sep - start)));
            if (sep == std::string::npos) break;
            start = sep + 2;
        }
        std::string path;
        json* node = &document;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i].empty()) throw ConfigError(name, "empty key in override name");
            path = join(path, keys[i]);
            if (!node->is_object()) throw ConfigError(path, "override target is not an object");
            if (i + 1 < keys.size()) {
                node = &(*node)[keys[i]];
                if (node->is_null()) *node = json::object();
                continue;
            }
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error&) {
                parsed = value;
            }
            (*node)[keys[i]] = parsed;
        }
    }
}

RunConfig load_run_config(const std::filesystem::path& path, const Environment& overrides) {
    auto document = read_json_file(path);
    apply_overrides(document, overrides);
    return run_config_from_json(document, path.parent_path());
}

std::string config_hash(const RunConfig& config) {
    auto j = run_config_to_json(config);
    j.erase("jobs");
    j.erase("output_dir");
    j.erase("morphology_file");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

std::vector<MatrixCell> MatrixConfig::cells() const {
    std::vector<MatrixCell> out;
    for (const auto& robot : robots)
        for (GaitKind gait : gaits) {
            if (required_leg_count(gait) != robot.leg_count()) continue;
            for (const auto& terrain : terrains) {
                MatrixCell cell{robot.name, robot.leg_count(), gait, terrain.kind, true};
                for (const auto& [g, t] : skip)
                    if (g == gait && t == terrain.kind) cell.executed = false;
                out.push_back(cell);
            }
        }
    return out;
}

RunConfig MatrixConfig::cell_config(const MatrixCell& cell) const {
    RunConfig c = base;
    const auto robot = std::find_if(robots.begin(), robots.end(), [&](const RobotModel& r) { return r.name == cell.morphology; });
    const auto terrain = std::find_if(terrains.begin(), terrains.end(), [&](const Terrain& t) { return t.kind == cell.terrain; });
    if (robot == robots.end() || terrain == terrains.end()) throw ConfigError("matrix", "cell refers to an unknown entry");
    c.robot = *robot;
    c.gait = cell.gait;
    c.terrain = *terrain;
    c.validate();
    return c;
}

MatrixConfig load_matrix_config(const std::filesystem::path& path, const Environment& overrides) {
    auto document = read_json_file(path);
    apply_overrides(document, overrides);
    Section root(document, "");
    MatrixConfig m;

    const auto& morphologies = root.raw("morphologies");
    if (!morphologies.is_array() || morphologies.empty())
        throw ConfigError("morphologies", "expected a non-empty list of morphology files");
    for (std::size_t i = 0; i < morphologies.size(); ++i) {
        const std::string where = "morphologies[" + std::to_string(i) + "]";
        if (!morphologies[i].is_string()) throw ConfigError(where, "expected a file path");
        std::filesystem::path p = morphologies[i].get<std::string>();
        if (p.is_relative()) p = path.parent_path() / p;
        if (!std::filesystem::exists(p)) throw ConfigError(where, "file not found: " + p.string());
        try {
            m.robots.push_back(load_morphology(p));
        } catch (const ConfigError& e) {
            rethrow_under(where, e);
        }
    }

    const auto& gaits = root.raw("gaits");
    if (!gaits.is_array() || gaits.empty()) throw ConfigError("gaits", "expected a non-empty list of gait names");
    for (std::size_t i = 0; i < gaits.size(); ++i) {
        const std::string where = "gaits[" + std::to_string(i) + "]";
        if (!gaits[i].is_string()) throw ConfigError(where, "expected a gait name");
        try {
            m.gaits.push_back(parse_gait(gaits[i].get<std::string>()));
        } catch (const ConfigError& e) {
            throw ConfigError(where, detail(e));
        }
    }

    const auto& terrains = root.raw("terrains");
    if (!terrains.is_array() || terrains.empty()) throw ConfigError("terrains", "expected a non-empty list of terrain blocks");
    for (std::size_t i = 0; i < terrains.size(); ++i) {
        const std::string where = "terrains[" + std::to_string(i) + "]";
        m.terrains.push_back(terrain_from(Section(terrains[i], where)));
        validate_under(where, [&] { m.terrains.back().validate(); });
    }

    if (root.has("not_executed")) {
        const auto& skip = root.raw("not_executed");
        if (!skip.is_array()) throw ConfigError("not_executed", "expected a list of {gait, terrain} pairs");
        for (std::size_t i = 0; i < skip.size(); ++i) {
            Section s(skip[i], "not_executed[" + std::to_string(i) + "]");
            try {
                m.skip.emplace_back(parse_gait(s.string("gait")), parse_terrain_kind(s.string("terrain")));
            } catch (const ConfigError& e) {
                throw ConfigError("not_executed[" + std::to_string(i) + "]", detail(e));
            }
            s.finish();
        }
    }
    root.allow("not_executed");

    read_shared(root, m.base);
    root.finish();
    validate_shared(m.base);
    return m;
}

} // namespace gaitopt
