#pragma once

#include "retrial/measures.hpp"
#include "retrial/model.hpp"
#include "retrial/probability.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace retrial {

inline constexpr const char* kToolName = "retrial-si";
inline constexpr const char* kToolVersion = "0.1.0";

enum class SolverMethod { ilt, uniformization, monte_carlo };
enum class ReportKind { state_probs, marginals, moments, stationary, table_grid, theta_sweep };

std::string to_string(SolverMethod m);
std::string to_string(ReportKind k);
SolverMethod parse_solver_method(std::string_view text);
ReportKind parse_report_kind(std::string_view text);

struct SolverConfig {
    SolverMethod method = SolverMethod::ilt;
    int order = 20;            ///< Stehfest K
    double eps = 1e-10;        ///< uniformization truncation
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 1;
};

struct TableSpec {
    std::vector<int> populations{10, 20, 40};
    std::vector<int> servers{5, 10, 15, 20};
    std::vector<double> times{0.5, 2, 5, 10, 20};
};

/// A parsed and validated scenario document (JSON).
struct ScenarioConfig {
    ModelConfig model;
    /// Edge-list path, relative to the config file. "{N}" is replaced by the population size.
    std::optional<std::string> graph_path;
    SolverConfig solver;
    /// Unset means the default grid for the contact mode; set-but-empty is a config error.
    std::optional<std::vector<double>> times;
    std::vector<ReportKind> outputs;
    TableSpec table;
    std::vector<double> thetas{0, 1, 5};
    std::string output_dir = "out";
    std::filesystem::path base_dir;
    nlohmann::json document;

    /// Throws ConfigError with the offending field name.
    void validate() const;
    std::string config_hash() const;
};

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Fixture graph used for a population, resolved from graph_path. Throws ConfigError.
ContactGraph resolve_graph(const ScenarioConfig& scenario, int population);

/// Time grid for the scenario: the explicit one, or [0, 9] (homogeneous) /
/// [0, 14] (heterogeneous) in steps of 0.1.
std::vector<double> scenario_times(const ScenarioConfig& scenario);

/// Transient distributions for `model` under the configured solver.
TransientSolution solve_transient(const ScenarioConfig& scenario, const ModelConfig& model,
                                  const std::vector<double>& times);

// ---------------------------------------------------------------------------
// Reports

struct ReportOptions {
    std::filesystem::path out_dir = "out";
    bool metadata = true;
};

struct ReportResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

/// Two decimals, ties to even (1.625 -> "1.62", 1.6249 -> "1.62").
std::string round_half_even(double value, int decimals = 2);

struct TableCell {
    int population = 0;
    int servers = 0;
    double time = 0.0;
    std::optional<double> mean_servers;
    std::optional<double> mean_orbit;
};

struct TableGrid {
    TableSpec spec;
    std::vector<TableCell> cells; ///< ordered by (c, t, N)
    const TableCell& at(int servers, double time, int population) const;
};

/// E[I(t)], E[R(t)] for every (N, c, t); cells with c >= N stay empty.
TableGrid compute_table(const ScenarioConfig& scenario, const TableSpec& spec);

/// table_grid.csv (rounded "(E_I,E_R)" cells, one row per (c, t), one column per N)
/// and table_grid_unrounded.csv.
ReportResult table_report(const ScenarioConfig& scenario, const TableSpec& spec, const ReportOptions& options);

struct ReferenceCell {
    int population = 0;
    int servers = 0;
    double time = 0.0;
    double mean_servers = 0.0;
    double mean_orbit = 0.0;
};

/// Reference grid CSV with header "c,t,N,E_I,E_R".
std::vector<ReferenceCell> load_reference_table(const std::filesystem::path& path);

struct MatchSummary {
    std::size_t compared = 0;
    std::size_t matched = 0;
};

/// Tallies cells whose rounded values are within `tolerance` of the reference in
/// both coordinates; writes a per-cell report CSV headed by `metadata`.
MatchSummary write_match_report(const TableGrid& grid, const std::vector<ReferenceCell>& reference,
                                double tolerance, const std::filesystem::path& path,
                                std::vector<std::string> metadata);

struct SweepRow {
    ContactMode mode = ContactMode::homogeneous;
    double theta = 0.0;
    double time = 0.0;
    double mean_servers = 0.0;
    double mean_orbit = 0.0;
};

/// E[I], E[R] over thetas x times for the homogeneous model, and for the
/// heterogeneous one too when a graph is configured. Duplicate thetas are
/// dropped with a warning.
std::vector<SweepRow> compute_theta_sweep(const ScenarioConfig& scenario, std::vector<double> thetas,
                                          const std::vector<double>& times, std::vector<std::string>* warnings);

ReportResult sweep_theta(const ScenarioConfig& scenario, const std::vector<double>& thetas,
                         const std::vector<double>& times, const ReportOptions& options);

/// MARGINALS: marginals_server.csv and marginals_orbit.csv as (t,index,value).
/// MOMENTS: moments.csv as (t,E_I,E_R).
ReportResult emit_timeseries(const ScenarioConfig& scenario, ReportKind kind, const std::vector<double>& times,
                             const ReportOptions& options);

/// stationary.csv (i,j,pi) from the null-space solve, cross-checked by the final-value limit.
ReportResult stationary_report(const ScenarioConfig& scenario, const ReportOptions& options);

/// state_probs.csv (t,i,j,p)
ReportResult state_probs_report(const ScenarioConfig& scenario, const std::vector<double>& times,
                                const ReportOptions& options);

/// Every configured output kind.
ReportResult run_scenario(const ScenarioConfig& scenario, const ReportOptions& options);

/// Header lines ("# key: value") describing the scenario and solver.
std::vector<std::string> metadata_lines(const ScenarioConfig& scenario, const ModelConfig& model);

} // namespace retrial
