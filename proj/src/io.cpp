#include "gaitopt/io.hpp"

#include "gaitopt/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace gaitopt {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Reads a number that may have been written as null (NaN) by number_or_null.
double number_of(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required key");
    const auto& v = j.at(key);
    if (v.is_null()) return kNaN;
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required key");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key, "has the wrong type");
    }
}

std::vector<double> numbers_of(const json& j, const std::string& key, const std::string& path) {
    const auto values = get_as<std::vector<json>>(j, key, path);
    std::vector<double> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number()) throw ConfigError(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(values[i].get<double>());
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    if (quoted) throw ConfigError("", "CSV line " + std::to_string(line_number) + ": unterminated quote");
    fields.push_back(std::move(field));
    return fields;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json statistics_to_json(const ArchiveStatistics& s) {
    return {{"size", s.size},
            {"min_load", s.min_load},
            {"median_load", s.median_load},
            {"max_speed", s.max_speed},
            {"max_stability", s.max_stability}};
}

ArchiveStatistics statistics_from_json(const json& j, const std::string& path) {
    ArchiveStatistics s;
    s.size = get_as<std::size_t>(j, "size", path);
    s.min_load = number_of(j, "min_load", path);
    s.median_load = number_of(j, "median_load", path);
    s.max_speed = number_of(j, "max_speed", path);
    s.max_stability = number_of(j, "max_stability", path);
    return s;
}

json term_to_json(const RegressionTerm& t) {
    return {{"name", t.name},
            {"group", std::string(to_string(t.group))},
            {"aliased", t.aliased},
            {"coefficient", number_or_null(t.coefficient)},
            {"standardized", number_or_null(t.standardized)},
            {"std_error", number_or_null(t.std_error)},
            {"t_statistic", number_or_null(t.t_statistic)},
            {"p_value", number_or_null(t.p_value)},
            {"significant", t.significant}};
}

VariableGroup parse_group(const std::string& name, const std::string& path) {
    for (auto g : {VariableGroup::duty_height, VariableGroup::strides, VariableGroup::speeds})
        if (to_string(g) == name) return g;
    throw ConfigError(path, "unknown variable group '" + name + "'");
}

RegressionTerm term_from_json(const json& j, const std::string& path) {
    RegressionTerm t;
    t.name = get_as<std::string>(j, "name", path);
    t.group = parse_group(get_as<std::string>(j, "group", path), path + ".group");
    t.aliased = get_as<bool>(j, "aliased", path);
    t.coefficient = number_of(j, "coefficient", path);
    t.standardized = number_of(j, "standardized", path);
    t.std_error = number_of(j, "std_error", path);
    t.t_statistic = number_of(j, "t_statistic", path);
    t.p_value = number_of(j, "p_value", path);
    t.significant = get_as<bool>(j, "significant", path);
    return t;
}

std::string fixed(double v, int precision) {
    if (std::isnan(v)) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

std::string scientific(double v) {
    if (std::isnan(v)) return "n/a";
    std::ostringstream out;
    out << std::scientific << std::setprecision(3) << v;
    return out.str();
}

} // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan") return kNaN;
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size())
        throw ConfigError("", "not a number: '" + text + "'");
    return value;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("", "cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("", "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json archive_to_json(const ParetoArchive& archive) {
    const auto& m = archive.metadata;
    json entries = json::array();
    for (const auto& e : archive.entries) {
        entries.push_back({{"genome", e.genome},
                           {"decision",
                            {{"stride_m", e.decision.strides},
                             {"swing_speed_mps", e.decision.swing_speeds},
                             {"swing_height_m", e.decision.swing_height},
                             {"duty_factor", e.decision.duty_factor}}},
                           {"objectives",
                            {{"f_speed", e.objectives.f_speed},
                             {"f_stability", e.objectives.f_stability},
                             {"f_load", e.objectives.f_load}}},
                           {"minimized", e.minimized},
                           {"constraint_violation", e.constraint_violation},
                           {"failure", std::string(to_string(e.failure))},
                           {"dx_m", e.dx},
                           {"dy_m", e.dy},
                           {"period_s", e.period},
                           {"max_abs_torque_nm", e.max_abs_torque}});
    }
    return {{"metadata",
             {{"gait", m.gait},
              {"terrain", m.terrain},
              {"morphology", m.morphology},
              {"seed", m.seed},
              {"config_hash", m.config_hash},
              {"objective_count", m.objective_count},
              {"version", m.version}}},
            {"entries", entries}};
}

ParetoArchive archive_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "archive must be a JSON object");
    ParetoArchive a;
    const auto meta = get_as<json>(j, "metadata", "archive");
    a.metadata.gait = get_as<std::string>(meta, "gait", "metadata");
    a.metadata.terrain = get_as<std::string>(meta, "terrain", "metadata");
    a.metadata.morphology = get_as<std::string>(meta, "morphology", "metadata");
    a.metadata.seed = get_as<std::uint64_t>(meta, "seed", "metadata");
    a.metadata.config_hash = get_as<std::string>(meta, "config_hash", "metadata");
    a.metadata.objective_count = get_as<int>(meta, "objective_count", "metadata");
    a.metadata.version = get_as<std::string>(meta, "version", "metadata");
    if (a.metadata.objective_count != 2 && a.metadata.objective_count != 3)
        throw ConfigError("metadata.objective_count", "must be 2 or 3");

    const auto entries = get_as<std::vector<json>>(j, "entries", "archive");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = "entries[" + std::to_string(i) + "]";
        const auto& src = entries[i];
        ArchiveEntry e;
        e.genome = numbers_of(src, "genome", path);
        const auto d = get_as<json>(src, "decision", path);
        e.decision.strides = numbers_of(d, "stride_m", path + ".decision");
        e.decision.swing_speeds = numbers_of(d, "swing_speed_mps", path + ".decision");
        e.decision.swing_height = number_of(d, "swing_height_m", path + ".decision");
        e.decision.duty_factor = number_of(d, "duty_factor", path + ".decision");
        if (e.decision.strides.size() != e.decision.swing_speeds.size() ||
            e.genome.size() != 2 * e.decision.strides.size() + 2)
            throw ConfigError(path + ".decision", "decision and genome lengths disagree");
        const auto o = get_as<json>(src, "objectives", path);
        e.objectives.f_speed = number_of(o, "f_speed", path + ".objectives");
        e.objectives.f_stability = number_of(o, "f_stability", path + ".objectives");
        e.objectives.f_load = number_of(o, "f_load", path + ".objectives");
        e.minimized = numbers_of(src, "minimized", path);
        if (e.minimized.size() != static_cast<std::size_t>(a.metadata.objective_count))
            throw ConfigError(path + ".minimized", "length differs from metadata.objective_count");
        e.constraint_violation = number_of(src, "constraint_violation", path);
        try {
            e.failure = parse_failure(get_as<std::string>(src, "failure", path));
        } catch (const Error& err) {
            throw ConfigError(path + ".failure", err.what());
        }
        e.dx = number_of(src, "dx_m", path);
        e.dy = number_of(src, "dy_m", path);
        e.period = number_of(src, "period_s", path);
        e.max_abs_torque = number_of(src, "max_abs_torque_nm", path);
        a.entries.push_back(std::move(e));
    }
    return a;
}

void write_archive(const std::filesystem::path& path, const ParetoArchive& archive) {
    write_text_file(path, archive_to_json(archive).dump(2) + "\n");
}

ParetoArchive read_archive(const std::filesystem::path& path) { return archive_from_json(read_json_file(path)); }

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(name, "CSV column not found");
    return static_cast<std::size_t>(it - header.begin());
}

std::string provenance_line(const Provenance& p) {
    return "gaitopt " + p.version + " config_hash=" + p.config_hash + " seed=" + std::to_string(p.seed);
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (number == 1 && line.starts_with("# ")) {
            t.provenance = line.substr(2);
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv_line(line, number);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw ConfigError("", "CSV line " + std::to_string(number) + ": expected " + std::to_string(t.header.size()) +
                                      " fields, found " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw ConfigError("", "CSV has no header");
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

std::string to_csv(const CsvTable& table) {
    std::string out;
    if (!table.provenance.empty()) out += "# " + table.provenance + "\n";
    auto append = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_field(fields[i]);
        }
        out += '\n';
    };
    append(table.header);
    for (const auto& row : table.rows) append(row);
    return out;
}

GenerationRecord generation_record(int generation, std::size_t population_size, std::span<const ArchiveEntry> members) {
    GenerationRecord r;
    r.generation = generation;
    r.population = population_size;
    std::vector<double> speed, stability, load;
    for (const auto& e : members) {
        if (!e.feasible()) continue;
        speed.push_back(e.objectives.f_speed);
        stability.push_back(e.objectives.f_stability);
        load.push_back(e.objectives.f_load);
    }
    r.feasible = speed.size();
    if (speed.empty()) {
        r.best_speed = r.median_speed = r.best_stability = r.median_stability = r.best_load = r.median_load = kNaN;
        return r;
    }
    r.best_speed = *std::max_element(speed.begin(), speed.end());
    r.best_stability = *std::max_element(stability.begin(), stability.end());
    r.best_load = *std::min_element(load.begin(), load.end());
    r.median_speed = median_of(speed);
    r.median_stability = median_of(stability);
    r.median_load = median_of(load);
    return r;
}

CsvTable generations_table(const Provenance& p, std::span<const GenerationRecord> records) {
    CsvTable t;
    t.provenance = provenance_line(p);
    t.header = {"generation",      "population",         "feasible",   "best_speed", "median_speed",
                "best_stability", "median_stability", "best_load", "median_load"};
    for (const auto& r : records)
        t.rows.push_back({std::to_string(r.generation), std::to_string(r.population), std::to_string(r.feasible),
                          format_double(r.best_speed), format_double(r.median_speed), format_double(r.best_stability),
                          format_double(r.median_stability), format_double(r.best_load), format_double(r.median_load)});
    return t;
}

std::vector<GenerationRecord> generations_from_table(const CsvTable& t) {
    std::vector<GenerationRecord> out;
    const std::size_t c[] = {t.column("generation"),     t.column("population"),       t.column("feasible"),
                             t.column("best_speed"),     t.column("median_speed"),     t.column("best_stability"),
                             t.column("median_stability"), t.column("best_load"),      t.column("median_load")};
    for (const auto& row : t.rows) {
        GenerationRecord r;
        r.generation = std::stoi(row[c[0]]);
        r.population = std::stoul(row[c[1]]);
        r.feasible = std::stoul(row[c[2]]);
        r.best_speed = parse_double(row[c[3]]);
        r.median_speed = parse_double(row[c[4]]);
        r.best_stability = parse_double(row[c[5]]);
        r.median_stability = parse_double(row[c[6]]);
        r.best_load = parse_double(row[c[7]]);
        r.median_load = parse_double(row[c[8]]);
        out.push_back(r);
    }
    return out;
}

CsvTable pareto_table(const Provenance& p, const ParetoArchive& archive) {
    CsvTable t;
    t.provenance = provenance_line(p);
    t.header = {"index", "f_speed", "f_stability", "f_load", "duty_factor", "swing_height_m"};
    const std::size_t k = archive.entries.empty() ? 0 : archive.entries.front().decision.leg_count();
    for (std::size_t i = 0; i < k; ++i) t.header.push_back("stride_m[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < k; ++i) t.header.push_back("swing_speed_mps[" + std::to_string(i) + "]");
    t.header.push_back("failure");
    for (std::size_t r = 0; r < archive.entries.size(); ++r) {
        const auto& e = archive.entries[r];
        std::vector<std::string> row{std::to_string(r), format_double(e.objectives.f_speed),
                                     format_double(e.objectives.f_stability), format_double(e.objectives.f_load),
                                     format_double(e.decision.duty_factor), format_double(e.decision.swing_height)};
        for (double v : e.decision.strides) row.push_back(format_double(v));
        for (double v : e.decision.swing_speeds) row.push_back(format_double(v));
        row.emplace_back(to_string(e.failure));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable trace_table(const Provenance& p, const SimulationTrace& trace) {
    CsvTable t;
    t.provenance = provenance_line(p);
    t.header = {"t_s",       "body_x_m", "body_y_m",       "body_z_m",         "body_yaw_rad",   "com_x_m",
                "com_y_m",   "com_z_m",  "stance_mask",    "support_margin_m", "statically_feasible",
                "force_residual_n", "moment_residual_nm", "joint_force_sum_n", "max_abs_torque_nm", "measured"};
    const bool detail = !trace.torques.empty();
    const std::size_t joints = trace.joint_count();
    if (detail) {
        for (std::size_t j = 0; j < joints; ++j)
            t.header.push_back("tau_nm[" + std::to_string(j / kJointsPerLeg) + "][" + std::to_string(j % kJointsPerLeg) + "]");
        for (std::size_t j = 0; j < joints; ++j)
            t.header.push_back("force_n[" + std::to_string(j / kJointsPerLeg) + "][" + std::to_string(j % kJointsPerLeg) + "]");
    }
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const auto& s = trace.samples[k];
        std::vector<std::string> row{format_double(s.t),
                                     format_double(s.pose.position.x()),
                                     format_double(s.pose.position.y()),
                                     format_double(s.pose.position.z()),
                                     format_double(s.pose.yaw),
                                     format_double(s.com.x()),
                                     format_double(s.com.y()),
                                     format_double(s.com.z()),
                                     std::to_string(s.stance_mask),
                                     format_double(s.support_margin),
                                     s.statically_feasible ? "1" : "0",
                                     format_double(s.force_residual),
                                     format_double(s.moment_residual),
                                     format_double(s.joint_force_sum),
                                     format_double(s.max_abs_torque),
                                     k >= trace.first_measured ? "1" : "0"};
        if (detail) {
            for (std::size_t j = 0; j < joints; ++j) row.push_back(format_double(trace.torques[k * joints + j]));
            for (std::size_t j = 0; j < joints; ++j) row.push_back(format_double(trace.joint_force_norms[k * joints + j]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

json evaluation_summary(const Provenance& p, const ArchiveEntry& e, const SimulationTrace& trace) {
    json j = archive_to_json(ParetoArchive{{}, {e}})["entries"][0];
    j["provenance"] = {{"version", p.version}, {"config_hash", p.config_hash}, {"seed", p.seed}};
    j["trace"] = {{"samples", trace.samples.size()},
                  {"measured_samples", trace.measured_count()},
                  {"dt_s", trace.dt},
                  {"measured_cycles", trace.measured_cycles},
                  {"torque_exceeded", trace.torque_exceeded},
                  {"torque_violation_nm", trace.torque_violation},
                  {"failure_sample", trace.failure_sample ? json(*trace.failure_sample) : json(nullptr)},
                  {"slip_samples", trace.slip_samples},
                  {"friction_slip_samples", trace.friction_slip_samples},
                  {"blocked_samples", trace.blocked_samples},
                  {"unbalanced_samples", trace.unbalanced_samples}};
    return j;
}

json regression_to_json(const RegressionReport& r) {
    json terms = json::array();
    for (const auto& t : r.terms) terms.push_back(term_to_json(t));
    return {{"response", "f_load"},
            {"observations", r.observations},
            {"degrees_of_freedom", r.degrees_of_freedom},
            {"alpha", r.alpha},
            {"r_squared", r.r_squared},
            {"degenerate", r.degenerate},
            {"intercept", term_to_json(r.intercept)},
            {"terms", terms},
            {"notes", r.notes}};
}

RegressionReport regression_from_json(const json& j) {
    RegressionReport r;
    r.observations = get_as<std::size_t>(j, "observations", "report");
    r.degrees_of_freedom = get_as<std::size_t>(j, "degrees_of_freedom", "report");
    r.alpha = number_of(j, "alpha", "report");
    r.r_squared = number_of(j, "r_squared", "report");
    r.degenerate = get_as<bool>(j, "degenerate", "report");
    r.intercept = term_from_json(get_as<json>(j, "intercept", "report"), "intercept");
    const auto terms = get_as<std::vector<json>>(j, "terms", "report");
    for (std::size_t i = 0; i < terms.size(); ++i) r.terms.push_back(term_from_json(terms[i], "terms[" + std::to_string(i) + "]"));
    r.notes = get_as<std::vector<std::string>>(j, "notes", "report");
    return r;
}

std::string regression_text(const RegressionReport& r) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"variable", "group", "B", "beta", "std_error", "t", "p", "sig"});
    auto add = [&](const RegressionTerm& t, const std::string& group) {
        rows.push_back({t.name, group, fixed(t.coefficient, 6), fixed(t.standardized, 4), fixed(t.std_error, 6),
                        fixed(t.t_statistic, 3), scientific(t.p_value),
                        t.aliased ? "aliased" : (t.significant ? "*" : "")});
    };
    add(r.intercept, "");
    for (const auto& t : r.terms) add(t, std::string(to_string(t.group)));

    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    out << "Regression of f_load, n = " << r.observations << ", dof = " << r.degrees_of_freedom
        << ", R^2 = " << fixed(r.r_squared, 4) << ", alpha = " << r.alpha << "\n";
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string cell = row[c];
            const std::size_t pad = width[c] - cell.size();
            if (c < 2) cell += std::string(pad, ' ');
            else cell = std::string(pad, ' ') + cell;
            line += (c ? "  " : "") + cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << "\n";
    }
    if (r.degenerate) out << "degenerate fit\n";
    for (const auto& note : r.notes) out << "note: " << note << "\n";
    return out.str();
}

json comparison_to_json(const ArchiveComparison& c) {
    return {{"with_load", statistics_to_json(c.with_load)},
            {"without_load", statistics_to_json(c.without_load)},
            {"relative_change",
             {{"min_load", c.min_load_change},
              {"median_load", c.median_load_change},
              {"max_speed", c.max_speed_change},
              {"max_stability", c.max_stability_change}}}};
}

ArchiveComparison comparison_from_json(const json& j) {
    ArchiveComparison c;
    c.with_load = statistics_from_json(get_as<json>(j, "with_load", "comparison"), "with_load");
    c.without_load = statistics_from_json(get_as<json>(j, "without_load", "comparison"), "without_load");
    const auto rel = get_as<json>(j, "relative_change", "comparison");
    c.min_load_change = number_of(rel, "min_load", "relative_change");
    c.median_load_change = number_of(rel, "median_load", "relative_change");
    c.max_speed_change = number_of(rel, "max_speed", "relative_change");
    c.max_stability_change = number_of(rel, "max_stability", "relative_change");
    return c;
}

std::string_view to_string(CellStatus status) noexcept {
    switch (status) {
    case CellStatus::success: return "success";
    case CellStatus::failure: return "failure";
    case CellStatus::not_executed: return "not_executed";
    case CellStatus::error: return "error";
    }
    return "unknown";
}

CellStatus parse_cell_status(std::string_view name) {
    for (auto s : {CellStatus::success, CellStatus::failure, CellStatus::not_executed, CellStatus::error})
        if (to_string(s) == name) return s;
    throw ConfigError("status", "unknown cell status '" + std::string(name) + "'");
}

std::string matrix_text(std::span<const MatrixResult> results) {
    std::vector<TerrainKind> terrains;
    std::vector<std::pair<std::size_t, GaitKind>> rows;
    std::map<std::tuple<std::size_t, int, int>, CellStatus> cells;
    for (const auto& r : results) {
        if (std::find(terrains.begin(), terrains.end(), r.cell.terrain) == terrains.end()) terrains.push_back(r.cell.terrain);
        const std::pair row{r.cell.leg_count, r.cell.gait};
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        cells[{r.cell.leg_count, static_cast<int>(r.cell.gait), static_cast<int>(r.cell.terrain)}] = r.status;
    }
    auto mark = [](CellStatus s) -> std::string {
        switch (s) {
        case CellStatus::success: return "o";
        case CellStatus::failure: return "x";
        case CellStatus::not_executed: return "-";
        case CellStatus::error: return "!";
        }
        return "?";
    };
    std::ostringstream out;
    out << std::left << std::setw(6) << "legs" << std::setw(10) << "gait";
    for (auto t : terrains) out << std::setw(8) << to_string(t);
    out << "\n";
    for (const auto& [legs, gait] : rows) {
        std::string line;
        std::ostringstream row;
        row << std::left << std::setw(6) << legs << std::setw(10) << to_string(gait);
        for (auto t : terrains) {
            const auto it = cells.find({legs, static_cast<int>(gait), static_cast<int>(t)});
            row << std::setw(8) << (it == cells.end() ? std::string(" ") : mark(it->second));
        }
        line = row.str();
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << "\n";
    }
    out << "o: success  x: failure  -: not executed  !: error\n";
    return out.str();
}

CsvTable matrix_table(const Provenance& p, std::span<const MatrixResult> results) {
    CsvTable t;
    t.provenance = provenance_line(p);
    t.header = {"morphology", "legs", "gait", "terrain", "status", "best_failure", "archive_size", "best_speed", "message"};
    for (const auto& r : results)
        t.rows.push_back({r.cell.morphology, std::to_string(r.cell.leg_count), std::string(to_string(r.cell.gait)),
                          std::string(to_string(r.cell.terrain)), std::string(to_string(r.status)),
                          std::string(to_string(r.best_failure)), std::to_string(r.archive_size),
                          format_double(r.best_speed), r.message});
    return t;
}

std::vector<MatrixResult> matrix_from_table(const CsvTable& t) {
    std::vector<MatrixResult> out;
    const std::size_t c[] = {t.column("morphology"), t.column("legs"),         t.column("gait"),
                             t.column("terrain"),    t.column("status"),       t.column("best_failure"),
                             t.column("archive_size"), t.column("best_speed"), t.column("message")};
    for (const auto& row : t.rows) {
        MatrixResult r;
        r.cell.morphology = row[c[0]];
        r.cell.leg_count = std::stoul(row[c[1]]);
        r.cell.gait = parse_gait(row[c[2]]);
        r.cell.terrain = parse_terrain_kind(row[c[3]]);
        r.status = parse_cell_status(row[c[4]]);
        r.cell.executed = r.status != CellStatus::not_executed;
        r.best_failure = parse_failure(row[c[5]]);
        r.archive_size = std::stoul(row[c[6]]);
        r.best_speed = parse_double(row[c[7]]);
        r.message = row[c[8]];
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace gaitopt
