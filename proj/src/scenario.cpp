#include "retrial/scenario.hpp"

#include "retrial/errors.hpp"
#include "retrial/generator.hpp"
#include "retrial/inversion.hpp"
#include "retrial/laplace.hpp"
#include "retrial/transient.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace retrial {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum spellings

std::string to_string(SolverMethod m) {
    switch (m) {
    case SolverMethod::ilt:
        return "ilt";
    case SolverMethod::uniformization:
        return "uniformization";
    case SolverMethod::monte_carlo:
        return "monte_carlo";
    }
    return "unknown";
}

std::string to_string(ReportKind k) {
    switch (k) {
    case ReportKind::state_probs:
        return "state_probs";
    case ReportKind::marginals:
        return "marginals";
    case ReportKind::moments:
        return "moments";
    case ReportKind::stationary:
        return "stationary";
    case ReportKind::table_grid:
        return "table_grid";
    case ReportKind::theta_sweep:
        return "theta_sweep";
    }
    return "unknown";
}

SolverMethod parse_solver_method(std::string_view text) {
    if (text == "ilt")
        return SolverMethod::ilt;
    if (text == "uniformization")
        return SolverMethod::uniformization;
    if (text == "monte_carlo")
        return SolverMethod::monte_carlo;
    throw ConfigError("solver.method: expected ilt|uniformization|monte_carlo, got '" + std::string(text) + "'");
}

ReportKind parse_report_kind(std::string_view text) {
    for (auto k : {ReportKind::state_probs, ReportKind::marginals, ReportKind::moments, ReportKind::stationary,
                   ReportKind::table_grid, ReportKind::theta_sweep})
        if (text == to_string(k))
            return k;
    throw ConfigError("outputs: unknown report kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError((where.empty() ? "" : where + ".") + key + ": unknown key");
    }
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback) {
    if (!obj.contains(key))
        return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& obj, const char* key, const std::string& where, std::uint64_t fallback) {
    if (!obj.contains(key))
        return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError(where + "." + key + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key))
        return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

template <class T>
std::vector<T> get_list(const json& v, const std::string& where) {
    if (!v.is_array())
        throw ConfigError(where + ": expected a list");
    std::vector<T> out;
    for (const auto& e : v) {
        if constexpr (std::is_integral_v<T>) {
            if (!e.is_number_integer())
                throw ConfigError(where + ": expected integers");
        } else {
            if (!e.is_number())
                throw ConfigError(where + ": expected numbers");
        }
        out.push_back(e.get<T>());
    }
    return out;
}

std::vector<double> parse_times(const json& v) {
    if (v.is_array())
        return get_list<double>(v, "times");
    check_keys(v, "times", {"start", "stop", "step"});
    if (!v.contains("start") || !v.contains("stop") || !v.contains("step"))
        throw ConfigError("times: range form needs start, stop and step");
    const double start = get_number(v, "start", "times", 0.0);
    const double stop = get_number(v, "stop", "times", 0.0);
    const double step = get_number(v, "step", "times", 0.0);
    if (!(step > 0.0))
        throw ConfigError("times.step: must be > 0");
    if (!(stop >= start))
        throw ConfigError("times.stop: must be >= start");
    std::vector<double> out;
    for (long k = 0;; ++k) {
        const double t = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
        if (t > stop + 1e-9 * step)
            break;
        out.push_back(t);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_number(double v) {
    if (v == 0.0)
        return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    check_keys(doc, "", {"model", "graph_path", "solver", "times", "outputs", "table", "sweep", "output_dir"});

    ScenarioConfig sc;
    sc.document = doc;
    sc.base_dir = base_dir;

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        check_keys(m, "model",
                   {"N", "c", "alpha", "mu", "theta", "mode", "tagged_node", "closure", "initial_state"});
        auto& cfg = sc.model;
        cfg.population = get_int(m, "N", "model", cfg.population);
        cfg.servers = get_int(m, "c", "model", cfg.servers);
        cfg.alpha = get_number(m, "alpha", "model", cfg.alpha);
        cfg.mu = get_number(m, "mu", "model", cfg.mu);
        cfg.theta = get_number(m, "theta", "model", cfg.theta);
        cfg.mode = parse_contact_mode(get_field<std::string>(m, "mode", "model", to_string(cfg.mode)));
        cfg.tagged_node = get_int(m, "tagged_node", "model", cfg.tagged_node);
        cfg.closure = parse_closure(get_field<std::string>(m, "closure", "model", to_string(cfg.closure)));
        if (m.contains("initial_state")) {
            auto st = get_list<int>(m.at("initial_state"), "model.initial_state");
            if (st.size() != 2)
                throw ConfigError("model.initial_state: expected [i, j]");
            cfg.initial_state = {st[0], st[1]};
        }
    }

    if (doc.contains("graph_path")) {
        if (!doc.at("graph_path").is_string())
            throw ConfigError("graph_path: expected a string");
        sc.graph_path = doc.at("graph_path").get<std::string>();
    }

    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        check_keys(s, "solver", {"method", "K", "eps", "replicas", "seed"});
        sc.solver.method = parse_solver_method(get_field<std::string>(s, "method", "solver", "ilt"));
        sc.solver.order = get_int(s, "K", "solver", sc.solver.order);
        sc.solver.eps = get_number(s, "eps", "solver", sc.solver.eps);
        sc.solver.replicas = get_u64(s, "replicas", "solver", sc.solver.replicas);
        sc.solver.seed = get_u64(s, "seed", "solver", sc.solver.seed);
    }

    if (doc.contains("times"))
        sc.times = parse_times(doc.at("times"));

    if (!doc.contains("outputs"))
        throw ConfigError("outputs: at least one report kind is required");
    {
        const auto& o = doc.at("outputs");
        if (!o.is_array())
            throw ConfigError("outputs: expected a list");
        for (const auto& e : o) {
            if (!e.is_string())
                throw ConfigError("outputs: expected strings");
            sc.outputs.push_back(parse_report_kind(e.get<std::string>()));
        }
    }

    if (doc.contains("table")) {
        const auto& t = doc.at("table");
        check_keys(t, "table", {"N", "c", "t"});
        if (t.contains("N"))
            sc.table.populations = get_list<int>(t.at("N"), "table.N");
        if (t.contains("c"))
            sc.table.servers = get_list<int>(t.at("c"), "table.c");
        if (t.contains("t"))
            sc.table.times = get_list<double>(t.at("t"), "table.t");
    }

    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        check_keys(s, "sweep", {"theta"});
        if (s.contains("theta"))
            sc.thetas = get_list<double>(s.at("theta"), "sweep.theta");
    }

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string())
            throw ConfigError("output_dir: expected a string");
        sc.output_dir = doc.at("output_dir").get<std::string>();
    }

    sc.validate();
    return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.parent_path());
}

void ScenarioConfig::validate() const {
    model.validate();
    if (outputs.empty())
        throw ConfigError("outputs: at least one report kind is required");
    if (model.mode == ContactMode::heterogeneous && !graph_path)
        throw ConfigError("graph_path: required in heterogeneous mode");
    if (solver.order < 2 || solver.order > 20 || solver.order % 2 != 0)
        throw ConfigError("solver.K: must be even and in [2, 20]");
    if (!(solver.eps > 0.0 && solver.eps <= 1e-6))
        throw ConfigError("solver.eps: must lie in (0, 1e-6]");
    if (solver.method == SolverMethod::monte_carlo && solver.replicas < 1000)
        throw ConfigError("solver.replicas: must be >= 1000");
    if (times) {
        if (times->empty())
            throw ConfigError("times: must not be empty");
        for (std::size_t k = 0; k < times->size(); ++k) {
            if (!((*times)[k] >= 0.0))
                throw ConfigError("times: must be nonnegative");
            if (k > 0 && !((*times)[k] > (*times)[k - 1]))
                throw ConfigError("times: must be strictly increasing");
        }
    }
    for (double th : thetas)
        if (!(th >= 0.0))
            throw ConfigError("sweep.theta: must be >= 0");
    for (double t : table.times)
        if (!(t >= 0.0))
            throw ConfigError("table.t: must be nonnegative");
    for (std::size_t k = 1; k < table.times.size(); ++k)
        if (!(table.times[k] > table.times[k - 1]))
            throw ConfigError("table.t: must be strictly increasing");
    for (int n : table.populations)
        if (n < 2)
            throw ConfigError("table.N: must be >= 2");
    for (int c : table.servers)
        if (c < 1)
            throw ConfigError("table.c: must be >= 1");
}

std::string ScenarioConfig::config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(document.dump())));
    return buf;
}

namespace {

std::filesystem::path graph_file_for(const ScenarioConfig& scenario, int population) {
    std::string p = *scenario.graph_path;
    const std::string placeholder = "{N}";
    for (auto pos = p.find(placeholder); pos != std::string::npos; pos = p.find(placeholder))
        p.replace(pos, placeholder.size(), std::to_string(population));
    std::filesystem::path path(p);
    if (path.is_relative() && !scenario.base_dir.empty())
        path = scenario.base_dir / path;
    return path;
}

} // namespace

ContactGraph resolve_graph(const ScenarioConfig& scenario, int population) {
    if (!scenario.graph_path)
        throw ConfigError("graph_path: required in heterogeneous mode");
    const auto path = graph_file_for(scenario, population);
    if (!std::filesystem::exists(path))
        throw ConfigError("graph_path: file '" + path.string() + "' does not exist");
    try {
        return load_graph_file(path.string());
    } catch (const ParseError& e) {
        throw ConfigError("graph_path: " + path.string() + ": " + e.what());
    }
}

std::vector<double> scenario_times(const ScenarioConfig& scenario) {
    if (scenario.times)
        return *scenario.times;
    const double stop = scenario.model.mode == ContactMode::homogeneous ? 9.0 : 14.0;
    std::vector<double> out;
    for (int k = 0; k * 0.1 <= stop + 1e-9; ++k)
        out.push_back(std::round(k * 0.1 * 1e12) / 1e12);
    return out;
}

TransientSolution solve_transient(const ScenarioConfig& scenario, const ModelConfig& model,
                                  const std::vector<double>& times) {
    if (times.empty())
        throw ConfigError("times: must not be empty");
    std::optional<ContactGraph> graph;
    if (model.mode == ContactMode::heterogeneous)
        graph = resolve_graph(scenario, model.population);
    const auto rate = make_arrival_rate(model, graph ? &*graph : nullptr);

    switch (scenario.solver.method) {
    case SolverMethod::monte_carlo:
        return monte_carlo_estimate(model, rate, times, scenario.solver.replicas, scenario.solver.seed).solution;
    case SolverMethod::uniformization:
    case SolverMethod::ilt: {
        const auto q = build_generator(model, rate);
        const auto space = model.space();
        auto p0 = point_mass(space.size(), state_index(space, model.initial_state));
        if (scenario.solver.method == SolverMethod::uniformization)
            return transient_grid(q, p0, times, scenario.solver.eps);
        return transient_via_ilt(q, p0, times, scenario.solver.order);
    }
    }
    throw ConfigError("solver.method: unsupported");
}

// ---------------------------------------------------------------------------
// Report plumbing

namespace {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& meta, bool with_meta,
              const std::string& header)
        : path_(path) {
        if (!path.parent_path().empty())
            std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary);
        if (!out_)
            throw ConfigError("output: cannot write '" + path.string() + "'");
        if (with_meta)
            for (const auto& line : meta)
                out_ << "# " << line << '\n';
        out_ << header << '\n';
    }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << fields, first = false), ...);
        out_ << '\n';
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string solver_label(const SolverConfig& s) {
    switch (s.method) {
    case SolverMethod::ilt:
        return "ilt gaver-stehfest K=" + std::to_string(s.order);
    case SolverMethod::uniformization:
        return "uniformization eps=" + format_number(s.eps);
    case SolverMethod::monte_carlo:
        return "monte_carlo replicas=" + std::to_string(s.replicas) + " seed=" + std::to_string(s.seed) +
               " rng=" + kRngAlgorithm;
    }
    return "unknown";
}

} // namespace

std::vector<std::string> metadata_lines(const ScenarioConfig& scenario, const ModelConfig& model) {
    std::vector<std::string> lines;
    lines.push_back(std::string("tool: ") + kToolName + " " + kToolVersion);
    lines.push_back("config_hash: " + scenario.config_hash());
    lines.push_back("solver: " + solver_label(scenario.solver));
    std::string m = "model: N=" + std::to_string(model.population) + " c=" + std::to_string(model.servers) +
                    " alpha=" + format_number(model.alpha) + " mu=" + format_number(model.mu) +
                    " theta=" + format_number(model.theta) + " mode=" + to_string(model.mode) +
                    " initial_state=(" + std::to_string(model.initial_state.i) + "," +
                    std::to_string(model.initial_state.j) + ")";
    if (model.mode == ContactMode::heterogeneous)
        m += " tagged_node=" + std::to_string(model.tagged_node) + " closure=" + to_string(model.closure);
    lines.push_back(m);
    if (scenario.graph_path) {
        const auto path = graph_file_for(scenario, model.population);
        lines.push_back("graph_fixture: " + path.stem().string());
    }
    lines.push_back("generated: " + timestamp_utc());
    return lines;
}

std::string round_half_even(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    double r = std::nearbyint(value * scale) / scale;
    if (r == 0.0)
        r = 0.0; // drop the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
    return buf;
}

// ---------------------------------------------------------------------------
// Table grid

const TableCell& TableGrid::at(int servers, double time, int population) const {
    for (const auto& c : cells)
        if (c.servers == servers && c.population == population && std::abs(c.time - time) < 1e-12)
            return c;
    throw DomainError("no table cell for the requested (c, t, N)");
}

TableGrid compute_table(const ScenarioConfig& scenario, const TableSpec& spec) {
    TableGrid grid;
    grid.spec = spec;
    for (int c : spec.servers)
        for (double t : spec.times)
            for (int n : spec.populations)
                grid.cells.push_back({n, c, t, std::nullopt, std::nullopt});

    std::vector<std::pair<int, int>> pairs;
    for (int c : spec.servers)
        for (int n : spec.populations)
            if (c < n)
                pairs.emplace_back(n, c);

    std::vector<TransientSolution> solutions(pairs.size());
    detail::parallel_for(pairs.size(), [&](std::size_t k) {
        ModelConfig m = scenario.model;
        m.population = pairs[k].first;
        m.servers = pairs[k].second;
        m.initial_state = {0, 0};
        solutions[k] = solve_transient(scenario, m, spec.times);
    });

    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [n, c] = pairs[k];
        const StateSpace space(n, c);
        for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
            const auto& p = solutions[k].states[ti];
            for (auto& cell : grid.cells)
                if (cell.population == n && cell.servers == c && cell.time == spec.times[ti]) {
                    cell.mean_servers = moment_recovering(space, p, 1);
                    cell.mean_orbit = moment_orbit(space, p, 1);
                }
        }
    }
    return grid;
}

ReportResult table_report(const ScenarioConfig& scenario, const TableSpec& spec, const ReportOptions& options) {
    const auto grid = compute_table(scenario, spec);
    auto meta = metadata_lines(scenario, scenario.model);
    meta.push_back("table_parameters: alpha=" + format_number(scenario.model.alpha) +
                   " mu=" + format_number(scenario.model.mu) + " theta=" + format_number(scenario.model.theta) +
                   " (assumed for every cell; only N and c vary)");
    meta.push_back("rounding: half-even, 2 decimals");

    ReportResult result;
    {
        std::string header = "c,t";
        for (int n : spec.populations)
            header += ",N=" + std::to_string(n);
        CsvWriter csv(options.out_dir / "table_grid.csv", meta, options.metadata, header);
        std::ostringstream line;
        for (int c : spec.servers)
            for (double t : spec.times) {
                std::string row = std::to_string(c) + "," + format_number(t);
                for (int n : spec.populations) {
                    const auto& cell = grid.at(c, t, n);
                    row += ",";
                    if (cell.mean_servers)
                        row += "\"(" + round_half_even(*cell.mean_servers) + "," +
                               round_half_even(*cell.mean_orbit) + ")\"";
                }
                csv.row(row);
            }
        result.files.push_back(csv.path());
    }
    {
        CsvWriter csv(options.out_dir / "table_grid_unrounded.csv", meta, options.metadata, "c,t,N,E_I,E_R");
        for (const auto& cell : grid.cells) {
            if (cell.mean_servers)
                csv.row(cell.servers, format_number(cell.time), cell.population, format_number(*cell.mean_servers),
                        format_number(*cell.mean_orbit));
            else
                csv.row(cell.servers, format_number(cell.time), cell.population, "", "");
        }
        result.files.push_back(csv.path());
    }
    return result;
}

std::vector<ReferenceCell> load_reference_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("reference: cannot open '" + path.string() + "'");
    std::vector<ReferenceCell> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            if (line.rfind("c,t,N,E_I,E_R", 0) != 0)
                throw ParseError(line_no, "expected header c,t,N,E_I,E_R");
            header_seen = true;
            continue;
        }
        ReferenceCell cell;
        char comma = 0;
        std::istringstream is(line);
        if (!(is >> cell.servers >> comma >> cell.time >> comma >> cell.population >> comma >> cell.mean_servers >>
              comma >> cell.mean_orbit))
            throw ParseError(line_no, "malformed reference row");
        out.push_back(cell);
    }
    return out;
}

MatchSummary write_match_report(const TableGrid& grid, const std::vector<ReferenceCell>& reference,
                                double tolerance, const std::filesystem::path& path,
                                std::vector<std::string> metadata) {
    MatchSummary summary;
    auto& meta = metadata;
    std::ostringstream body;
    for (const auto& ref : reference) {
        const TableCell* cell = nullptr;
        for (const auto& c : grid.cells)
            if (c.servers == ref.servers && c.population == ref.population && std::abs(c.time - ref.time) < 1e-12)
                cell = &c;
        if (cell == nullptr || !cell->mean_servers)
            continue;
        ++summary.compared;
        const double ei = std::stod(round_half_even(*cell->mean_servers));
        const double er = std::stod(round_half_even(*cell->mean_orbit));
        const bool match = std::abs(ei - ref.mean_servers) <= tolerance + 1e-9 &&
                           std::abs(er - ref.mean_orbit) <= tolerance + 1e-9;
        summary.matched += match ? 1 : 0;
        body << ref.servers << ',' << format_number(ref.time) << ',' << ref.population << ','
             << round_half_even(*cell->mean_servers) << ',' << round_half_even(*cell->mean_orbit) << ','
             << format_number(ref.mean_servers) << ',' << format_number(ref.mean_orbit) << ','
             << (match ? "yes" : "no") << '\n';
    }
    meta.push_back("tolerance: " + format_number(tolerance));
    meta.push_back("matched: " + std::to_string(summary.matched) + " of " + std::to_string(summary.compared));
    CsvWriter csv(path, meta, true, "c,t,N,E_I,E_R,ref_E_I,ref_E_R,match");
    csv.row(body.str().empty() ? std::string() : body.str().substr(0, body.str().size() - 1));
    return summary;
}

// ---------------------------------------------------------------------------
// Theta sweep

std::vector<SweepRow> compute_theta_sweep(const ScenarioConfig& scenario, std::vector<double> thetas,
                                          const std::vector<double>& times, std::vector<std::string>* warnings) {
    if (times.empty())
        throw ConfigError("times: must not be empty");
    std::vector<double> unique;
    for (double th : thetas) {
        if (!(th >= 0.0))
            throw ConfigError("sweep.theta: must be >= 0");
        if (std::find(unique.begin(), unique.end(), th) != unique.end()) {
            if (warnings)
                warnings->push_back("sweep.theta: duplicate value " + format_number(th) + " dropped");
            continue;
        }
        unique.push_back(th);
    }

    std::vector<ContactMode> modes{ContactMode::homogeneous};
    if (scenario.graph_path)
        modes.push_back(ContactMode::heterogeneous);

    std::vector<std::pair<ContactMode, double>> jobs;
    for (auto mode : modes)
        for (double th : unique)
            jobs.emplace_back(mode, th);

    std::vector<TransientSolution> solutions(jobs.size());
    detail::parallel_for(jobs.size(), [&](std::size_t k) {
        ModelConfig m = scenario.model;
        m.mode = jobs[k].first;
        m.theta = jobs[k].second;
        solutions[k] = solve_transient(scenario, m, times);
    });

    std::vector<SweepRow> rows;
    const StateSpace space = scenario.model.space();
    for (std::size_t k = 0; k < jobs.size(); ++k)
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            const auto& p = solutions[k].states[ti];
            rows.push_back({jobs[k].first, jobs[k].second, times[ti], moment_recovering(space, p, 1),
                            moment_orbit(space, p, 1)});
        }
    return rows;
}

ReportResult sweep_theta(const ScenarioConfig& scenario, const std::vector<double>& thetas,
                         const std::vector<double>& times, const ReportOptions& options) {
    ReportResult result;
    const auto rows = compute_theta_sweep(scenario, thetas, times, &result.warnings);
    CsvWriter csv(options.out_dir / "theta_sweep.csv", metadata_lines(scenario, scenario.model), options.metadata,
                  "mode,theta,t,E_I,E_R");
    for (const auto& r : rows)
        csv.row(to_string(r.mode), format_number(r.theta), format_number(r.time), format_number(r.mean_servers),
                format_number(r.mean_orbit));
    result.files.push_back(csv.path());
    return result;
}

// ---------------------------------------------------------------------------
// Time series, stationary, state probabilities

ReportResult emit_timeseries(const ScenarioConfig& scenario, ReportKind kind, const std::vector<double>& times,
                             const ReportOptions& options) {
    if (kind != ReportKind::marginals && kind != ReportKind::moments)
        throw ConfigError("timeseries: kind must be marginals or moments");
    if (times.empty())
        throw ConfigError("times: must not be empty");

    const auto sol = solve_transient(scenario, scenario.model, times);
    const StateSpace space = scenario.model.space();
    const auto meta = metadata_lines(scenario, scenario.model);

    ReportResult result;
    if (kind == ReportKind::marginals) {
        CsvWriter server(options.out_dir / "marginals_server.csv", meta, options.metadata, "t,index,value");
        CsvWriter orbit(options.out_dir / "marginals_orbit.csv", meta, options.metadata, "t,index,value");
        for (const auto& p : sol.states) {
            const auto r = marginal_report(space, p);
            for (std::size_t i = 0; i < r.server_marginal.size(); ++i)
                server.row(format_number(p.time), i, format_number(r.server_marginal[i]));
            for (std::size_t j = 0; j < r.orbit_marginal.size(); ++j)
                orbit.row(format_number(p.time), j, format_number(r.orbit_marginal[j]));
        }
        result.files.push_back(server.path());
        result.files.push_back(orbit.path());
    } else {
        CsvWriter csv(options.out_dir / "moments.csv", meta, options.metadata, "t,E_I,E_R");
        for (const auto& p : sol.states) {
            const auto r = marginal_report(space, p);
            csv.row(format_number(p.time), format_number(r.mean_servers), format_number(r.mean_orbit));
        }
        result.files.push_back(csv.path());
    }
    return result;
}

ReportResult stationary_report(const ScenarioConfig& scenario, const ReportOptions& options) {
    const auto& model = scenario.model;
    std::optional<ContactGraph> graph;
    if (model.mode == ContactMode::heterogeneous)
        graph = resolve_graph(scenario, model.population);
    const auto q = build_generator(model, make_arrival_rate(model, graph ? &*graph : nullptr));
    const auto space = model.space();
    const auto pi = stationary_nullspace(q);
    const auto fvt = stationary_fvt(q, point_mass(space.size(), state_index(space, model.initial_state)));

    double max_diff = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k)
        max_diff = std::max(max_diff, std::abs(pi[k] - fvt.pi[k]));

    ReportResult result;
    auto meta = metadata_lines(scenario, model);
    meta.push_back("stationary_method: nullspace");
    meta.push_back("final_value_max_abs_diff: " + format_number(max_diff));
    const auto r = marginal_report(space, pi);
    meta.push_back("stationary_E_I: " + format_number(r.mean_servers));
    meta.push_back("stationary_E_R: " + format_number(r.mean_orbit));
    if (fvt.warning) {
        meta.push_back("warning: " + *fvt.warning);
        result.warnings.push_back(*fvt.warning);
    }
    CsvWriter csv(options.out_dir / "stationary.csv", meta, options.metadata, "i,j,pi");
    for (std::size_t x = 0; x < pi.size(); ++x) {
        const auto st = state_at(space, x);
        csv.row(st.i, st.j, format_number(pi[x]));
    }
    result.files.push_back(csv.path());
    return result;
}

ReportResult state_probs_report(const ScenarioConfig& scenario, const std::vector<double>& times,
                                const ReportOptions& options) {
    const auto sol = solve_transient(scenario, scenario.model, times);
    const auto space = scenario.model.space();
    CsvWriter csv(options.out_dir / "state_probs.csv", metadata_lines(scenario, scenario.model), options.metadata,
                  "t,i,j,p");
    for (const auto& p : sol.states)
        for (std::size_t x = 0; x < p.size(); ++x) {
            const auto st = state_at(space, x);
            csv.row(format_number(p.time), st.i, st.j, format_number(p[x]));
        }
    return {{csv.path()}, {}};
}

ReportResult run_scenario(const ScenarioConfig& scenario, const ReportOptions& options) {
    ReportResult all;
    auto merge = [&all](ReportResult r) {
        all.files.insert(all.files.end(), r.files.begin(), r.files.end());
        all.warnings.insert(all.warnings.end(), r.warnings.begin(), r.warnings.end());
    };
    const auto times = scenario_times(scenario);
    for (auto kind : scenario.outputs) {
        switch (kind) {
        case ReportKind::state_probs:
            merge(state_probs_report(scenario, times, options));
            break;
        case ReportKind::marginals:
        case ReportKind::moments:
            merge(emit_timeseries(scenario, kind, times, options));
            break;
        case ReportKind::stationary:
            merge(stationary_report(scenario, options));
            break;
        case ReportKind::table_grid:
            merge(table_report(scenario, scenario.table, options));
            break;
        case ReportKind::theta_sweep:
            merge(sweep_theta(scenario, scenario.thetas, times, options));
            break;
        }
    }
    return all;
}

} // namespace retrial
