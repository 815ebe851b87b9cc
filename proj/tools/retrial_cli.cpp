// retrial-si: config-driven runner for the retrial SI model.

#include "retrial/errors.hpp"
#include "retrial/scenario.hpp"
#include "retrial/transient.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    bool no_metadata = false;
};

retrial::ScenarioConfig load(const GlobalOptions& g) {
    if (g.config.empty())
        throw retrial::ConfigError("--config: a scenario file is required");
    auto sc = retrial::load_scenario(g.config);
    if (g.method)
        sc.solver.method = retrial::parse_solver_method(*g.method);
    if (g.seed)
        sc.solver.seed = *g.seed;
    sc.validate();
    return sc;
}

retrial::ReportOptions report_options(const GlobalOptions& g, const retrial::ScenarioConfig& sc) {
    retrial::ReportOptions opt;
    opt.out_dir = g.out ? std::filesystem::path(*g.out) : std::filesystem::path(sc.output_dir);
    opt.metadata = !g.no_metadata;
    return opt;
}

void print(const retrial::ReportResult& r) {
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << '\n';
    for (const auto& f : r.files)
        std::cout << f.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient and stationary analysis of the finite-population retrial SI model"};
    app.set_version_flag("--version", std::string(retrial::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Scenario file (JSON)");
    app.add_option("--out", g.out, "Output directory (overrides output_dir)");
    app.add_option("--method", g.method, "ilt | uniformization | monte_carlo");
    app.add_option("--seed", g.seed, "Monte Carlo seed");
    app.add_flag("--no-metadata", g.no_metadata, "Omit the '#' metadata header in CSV files");

    auto* solve = app.add_subcommand("solve", "Write every output listed in the config");
    auto* table = app.add_subcommand("table", "First-moment grid over N, c and t");
    std::optional<std::string> reference;
    double tolerance = 0.02;
    table->add_option("--reference", reference, "Reference grid CSV (c,t,N,E_I,E_R) to tally against");
    table->add_option("--tolerance", tolerance, "Match tolerance on rounded values")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "E[I], E[R] over a list of retrial rates");
    std::vector<double> thetas;
    sweep->add_option("--theta", thetas, "Retrial rates (overrides sweep.theta)");

    auto* timeseries = app.add_subcommand("timeseries", "Marginals or first moments over the time grid");
    std::string kind = "moments";
    timeseries->add_option("--kind", kind, "marginals | moments")->capture_default_str();

    auto* stationary = app.add_subcommand("stationary", "Stationary distribution");

    auto* simulate = app.add_subcommand("simulate", "One exact jump trajectory");
    std::optional<double> horizon;
    simulate->add_option("--horizon", horizon, "Simulation horizon (default: last grid time)");

    auto* validate = app.add_subcommand("validate-config", "Parse and validate a scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const auto sc = load(g);
        if (validate->parsed()) {
            std::cout << "ok " << sc.config_hash() << '\n';
            return 0;
        }
        const auto opt = report_options(g, sc);
        if (solve->parsed()) {
            print(retrial::run_scenario(sc, opt));
        } else if (table->parsed()) {
            print(retrial::table_report(sc, sc.table, opt));
            if (reference) {
                const auto grid = retrial::compute_table(sc, sc.table);
                const auto ref = retrial::load_reference_table(*reference);
                const auto path = opt.out_dir / "table_match.csv";
                auto meta = opt.metadata ? retrial::metadata_lines(sc, sc.model) : std::vector<std::string>{};
                meta.push_back("reference: " + *reference);
                const auto summary = retrial::write_match_report(grid, ref, tolerance, path, std::move(meta));
                std::cout << path.string() << '\n'
                          << "matched " << summary.matched << " of " << summary.compared << " cells\n";
            }
        } else if (sweep->parsed()) {
            print(retrial::sweep_theta(sc, thetas.empty() ? sc.thetas : thetas, retrial::scenario_times(sc), opt));
        } else if (timeseries->parsed()) {
            print(retrial::emit_timeseries(sc, retrial::parse_report_kind(kind), retrial::scenario_times(sc), opt));
        } else if (stationary->parsed()) {
            print(retrial::stationary_report(sc, opt));
        } else if (simulate->parsed()) {
            const double h = horizon ? *horizon : retrial::scenario_times(sc).back();
            std::optional<retrial::ContactGraph> graph;
            if (sc.model.mode == retrial::ContactMode::heterogeneous)
                graph = retrial::resolve_graph(sc, sc.model.population);
            const auto traj = retrial::simulate_gillespie(
                sc.model, retrial::make_arrival_rate(sc.model, graph ? &*graph : nullptr), h, sc.solver.seed);
            std::filesystem::create_directories(opt.out_dir);
            const auto path = opt.out_dir / "trajectory.csv";
            std::ofstream out(path, std::ios::binary);
            if (opt.metadata)
                for (const auto& line : retrial::metadata_lines(sc, sc.model))
                    out << "# " << line << '\n';
            retrial::write_trajectory_csv(traj, out);
            std::cout << path.string() << '\n';
        }
        return 0;
    } catch (const retrial::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const retrial::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const retrial::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const retrial::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
