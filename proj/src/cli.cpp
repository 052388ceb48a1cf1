#include "anypath/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "anypath/evaluation.hpp"
#include "anypath/oracle.hpp"
#include "anypath/solvers.hpp"

namespace anypath {

namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("ANYPATH_LOG");
        if (!env)
            return 0;
        const std::string value(env);
        if (value == "debug")
            return 2;
        if (value == "info")
            return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1)
        std::cerr << "[anypath] " << msg << "\n";
}

Graph load_graph(const RunConfig& cfg) {
    const bool has_file = cfg.graph_file.has_value();
    const bool has_gen = cfg.gen_nodes.has_value();
    if (has_file == has_gen)
        throw ConfigError("exactly one graph source required: --graph or --gen-nodes/...");
    if (has_file) {
        std::ifstream in(*cfg.graph_file);
        if (!in)
            throw ConfigError("cannot open graph file '" + *cfg.graph_file + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            return parse_graph(buffer.str());
        } catch (const ParseError& err) {
            throw ConfigError(*cfg.graph_file + ": " + err.what());
        }
    }
    if (cfg.gen_rates.empty())
        throw ConfigError("generator needs --gen-rates");
    if (!cfg.gen_seed)
        throw ConfigError("generator graph source needs --gen-seed");
    return generate_random_graph(*cfg.gen_nodes, cfg.gen_rates, cfg.gen_density,
                                 RatioLaw::parse(cfg.gen_ratio_law), *cfg.gen_seed,
                                 cfg.packet_bytes * 8);
}

MetricKind resolve_metric(const RunConfig& cfg, const Graph& g) {
    (void)g;
    if (cfg.packet_bytes <= 0)
        throw ConfigError("--packet-bytes must be positive");
    if (cfg.metric == "eatx")
        return MetricKind::eatx();
    if (cfg.metric == "eatt")
        return MetricKind::eatt(cfg.packet_bytes * 8);
    throw ConfigError("unknown metric '" + cfg.metric + "' (expected eatx or eatt)");
}

// nullopt means multirate; otherwise the fixed rate's index.
std::optional<std::size_t> resolve_rate_mode(const RunConfig& cfg, const Graph& g) {
    if (cfg.rate_mode == "multi")
        return std::nullopt;
    const std::string prefix = "single:";
    if (cfg.rate_mode.rfind(prefix, 0) == 0) {
        const auto bps = parse_rate_token(cfg.rate_mode.substr(prefix.size()));
        if (!bps)
            throw ConfigError("bad rate in --rate-mode '" + cfg.rate_mode + "'");
        try {
            return g.rate_index(*bps);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(err.what());
        }
    }
    throw ConfigError("bad --rate-mode '" + cfg.rate_mode + "' (expected multi or single:<bps>)");
}

// Refuses to clobber an existing output file unless --force.
std::ofstream open_output(const RunConfig& cfg, const std::string& filename) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const fs::path path = dir / filename;
    if (!cfg.force && fs::exists(path))
        throw ConfigError("output file " + path.string() +
                          " already exists (use --force to overwrite)");
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    log_info("writing " + path.string());
    return out;
}

RoutingTable solve_table(const Graph& g, NodeId dest, std::optional<std::size_t> rate,
                         MetricKind metric) {
    return rate ? shortest_anypath_first(g, dest, *rate, metric)
                : shortest_multirate_anypath_first(g, dest, metric);
}

NodeId require_node(const std::optional<NodeId>& id, const Graph& g, const char* flag) {
    if (!id)
        throw ConfigError(std::string("missing ") + flag);
    if (*id >= g.node_count())
        throw ConfigError(std::string(flag) + " " + std::to_string(*id) +
                          " out of range (graph has " + std::to_string(g.node_count()) +
                          " nodes)");
    return *id;
}

void print_table_summary(std::ostream& out, const Graph& g, const RoutingTable& table) {
    out << "destination " << table.destination << ", metric "
        << (table.metric.id == MetricId::Eatx ? "eatx" : "eatt");
    if (table.fixed_rate)
        out << ", rate " << g.rate_bps(*table.fixed_rate) << " bps";
    out << "\n";
    for (NodeId v = 0; v < g.node_count(); ++v) {
        out << "  node " << v << ": cost " << format_cost(table.cost[v], table.metric);
        if (table.metric.id == MetricId::Eatt && !std::isinf(table.cost[v]))
            out << " ms";
        if (table.tx_rate[v])
            out << " @ " << g.rate_bps(*table.tx_rate[v]) << " bps";
        if (!table.fset[v].empty()) {
            out << " via {";
            for (std::size_t k = 0; k < table.fset[v].members.size(); ++k)
                out << (k ? "," : "") << table.fset[v].members[k];
            out << "}";
        }
        out << "\n";
    }
}

int cmd_solve(const RunConfig& cfg) {
    const Graph g = load_graph(cfg);
    const MetricKind metric = resolve_metric(cfg, g);
    const auto rate = resolve_rate_mode(cfg, g);
    const NodeId dest = require_node(cfg.dest, g, "--dest");

    const RoutingTable table = solve_table(g, dest, rate, metric);
    auto out = open_output(cfg, "table_" + std::to_string(dest) + ".csv");
    write_table_csv(out, g, table);
    print_table_summary(std::cout, g, table);
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg) {
    const Graph g = load_graph(cfg);
    const MetricKind metric = resolve_metric(cfg, g);
    constexpr double kTolerance = 1e-9;

    std::vector<NodeId> destinations;
    if (cfg.dest)
        destinations.push_back(require_node(cfg.dest, g, "--dest"));
    else
        for (NodeId d = 0; d < g.node_count(); ++d)
            destinations.push_back(d);

    double worst = 0.0;
    for (NodeId dest : destinations) {
        // Oracle runs first: it owns the degree-bound check and must fail
        // before any solver table exists.
        std::vector<OracleTable> oracles;  // [0] multirate, then one per rate
        try {
            oracles.push_back(brute_force_optimal(g, dest, metric, std::nullopt));
            for (std::size_t r = 0; r < g.rate_count(); ++r)
                oracles.push_back(brute_force_optimal(g, dest, metric, r));
        } catch (const std::invalid_argument& err) {
            throw ConfigError(std::string(err.what()) +
                              "; validate needs per-rate out-degrees within the "
                              "enumeration bound — trim the graph or use --dest on a "
                              "smaller one");
        }
        struct Case {
            const char* name;
            RoutingTable solver;
            const OracleTable* oracle;
        };
        std::vector<Case> cases;
        cases.push_back(
            {"smaf", shortest_multirate_anypath_first(g, dest, metric), &oracles[0]});
        cases.push_back({"mabf", multirate_anypath_bellman_ford(g, dest, metric), &oracles[0]});
        for (std::size_t r = 0; r < g.rate_count(); ++r) {
            cases.push_back({"saf", shortest_anypath_first(g, dest, r, metric), &oracles[r + 1]});
            cases.push_back({"abf", anypath_bellman_ford(g, dest, r, metric), &oracles[r + 1]});
        }
        for (const Case& c : cases) {
            if (auto mismatch = compare_tables(c.solver, *c.oracle, kTolerance)) {
                std::cout << "MISMATCH dest=" << dest << " solver=" << c.name
                          << " node=" << mismatch->node << " field=" << mismatch->field
                          << " solver_value=" << mismatch->lhs
                          << " oracle_value=" << mismatch->rhs << "\n";
                return kExitMismatch;
            }
            for (NodeId v = 0; v < g.node_count(); ++v)
                if (!std::isinf(c.solver.cost[v]))
                    worst = std::max(worst, std::abs(c.solver.cost[v] - c.oracle->cost[v]));
        }
    }
    std::cout << "validated " << destinations.size() << " destination(s), 4 solvers, max |solver - oracle| = "
              << format_double(worst) << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
    const Graph g = load_graph(cfg);
    const MetricKind metric = resolve_metric(cfg, g);
    const auto rate = resolve_rate_mode(cfg, g);
    const NodeId dest = require_node(cfg.dest, g, "--dest");
    const NodeId source = require_node(cfg.source, g, "--source");
    if (!cfg.seed)
        throw ConfigError("simulate needs --seed");
    if (cfg.cap < 1)
        throw ConfigError("--cap must be at least 1");

    const RoutingTable table = solve_table(g, dest, rate, metric);
    const SimulationReport report =
        simulate_delivery(g, table, source, cfg.trials, cfg.cap, *cfg.seed, cfg.jobs);

    const std::string row = simulation_csv_row(report, source, dest, metric);
    auto out = open_output(cfg, "simulation.csv");
    out << "source,dest,trials,mean,stderr,failures,mean_hops,seed\n" << row << "\n";
    std::cout << "analytic cost " << format_cost(table.cost[source], metric) << "\n";
    std::cout << "source,dest,trials,mean,stderr,failures,mean_hops,seed\n" << row << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg) {
    const Graph g = load_graph(cfg);
    const MetricKind metric = resolve_metric(cfg, g);

    log_info("all-pairs multirate costs");
    const CostMatrix multi = all_pairs_costs(g, std::nullopt, metric, cfg.jobs);
    {
        auto out = open_output(cfg, "costs.csv");
        write_cost_matrix_csv(out, multi, metric);
    }

    std::vector<std::size_t> gain_rates;
    if (cfg.fixed_rate)
        gain_rates.push_back(g.rate_index(*cfg.fixed_rate));
    else
        for (std::size_t r = 0; r < g.rate_count(); ++r)
            gain_rates.push_back(r);
    for (std::size_t r : gain_rates) {
        log_info("gain distribution at " + std::to_string(g.rate_bps(r)) + " bps");
        const GainDistribution gains = gain_distribution(g, r, metric, cfg.jobs);
        auto out = open_output(cfg, "gains_" + std::to_string(g.rate_bps(r)) + ".csv");
        write_gains_csv(out, gains);
        std::cout << "rate " << g.rate_bps(r) << ": " << gains.finite.size()
                  << " finite gains, " << gains.infinite.size() << " infinite, "
                  << gains.unreachable_pairs << " unreachable pairs\n";
    }

    const std::vector<double> hist = rate_histogram(g, metric, cfg.jobs);
    {
        auto out = open_output(cfg, "rate_hist.csv");
        write_rate_histogram_csv(out, g, hist);
    }

    const ConnectivityReport connectivity = connectivity_report(g, metric, cfg.jobs);
    {
        auto out = open_output(cfg, "connectivity.csv");
        write_connectivity_csv(out, g, connectivity);
    }
    for (std::size_t r = 0; r < g.rate_count(); ++r) {
        auto out = open_output(cfg, "rank_" + std::to_string(g.rate_bps(r)) + ".csv");
        write_rank_curve_csv(out, connectivity.rank_curves[r]);
    }
    std::cout << "wrote evaluation CSVs to " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_gen(const RunConfig& cfg) {
    if (!cfg.gen_nodes || cfg.gen_rates.empty())
        throw ConfigError("gen needs --nodes and --rates");
    if (!cfg.seed)
        throw ConfigError("gen needs --seed");
    const Graph g = generate_random_graph(*cfg.gen_nodes, cfg.gen_rates, cfg.gen_density,
                                          RatioLaw::parse(cfg.gen_ratio_law), *cfg.seed,
                                          cfg.packet_bytes * 8);
    auto out = open_output(cfg, "graph.apg");
    out << serialize_graph(g);
    std::cout << "generated " << g.node_count() << " nodes, " << g.rate_count() << " rates";
    for (std::size_t r = 0; r < g.rate_count(); ++r)
        std::cout << (r ? "," : ":") << " " << g.link_count(r) << " links @ " << g.rate_bps(r);
    std::cout << "\n";
    return kExitOk;
}

std::vector<RateBps> parse_rate_list(const std::string& csv) {
    std::vector<RateBps> rates;
    std::stringstream in(csv);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto rate = parse_rate_token(token);
        if (!rate)
            throw ConfigError("bad rate '" + token + "' (need integral bits/s)");
        rates.push_back(*rate);
    }
    if (rates.empty())
        throw ConfigError("empty rate list");
    return rates;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"multirate anypath routing toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string gen_rates_csv;

    auto add_common = [&](CLI::App* cmd, bool with_source_opts) {
        if (with_source_opts) {
            cmd->add_option("--graph", cfg.graph_file, "graph file path");
            cmd->add_option("--gen-nodes", cfg.gen_nodes, "generator: node count");
            cmd->add_option("--gen-rates", gen_rates_csv, "generator: comma-joined bits/s");
            cmd->add_option("--gen-density", cfg.gen_density, "generator: link probability");
            cmd->add_option("--gen-ratio-law", cfg.gen_ratio_law,
                            "generator: constant:<v> | uniform:<lo>:<hi> | "
                            "decaying[:<lo>:<hi>[:<f>]]");
            cmd->add_option("--gen-seed", cfg.gen_seed, "generator: seed");
        }
        cmd->add_option("--metric", cfg.metric, "eatx | eatt")->default_val("eatx");
        cmd->add_option("--packet-bytes", cfg.packet_bytes, "packet size for eatt")
            ->default_val(1500);
        cmd->add_option("--out", cfg.out_dir, "output directory")->default_val("out");
        cmd->add_option("--jobs", cfg.jobs, "worker cap")->default_val(1);
        cmd->add_flag("--force", cfg.force, "overwrite existing outputs");
    };

    CLI::App* solve = app.add_subcommand("solve", "compute a routing table to one destination");
    add_common(solve, true);
    solve->add_option("--rate-mode", cfg.rate_mode, "multi | single:<bps>")->default_val("multi");
    solve->add_option("--dest", cfg.dest, "destination node id");

    CLI::App* validate =
        app.add_subcommand("validate", "check all four solvers against the exhaustive oracle");
    add_common(validate, true);
    validate->add_option("--dest", cfg.dest, "validate one destination only");

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo packet walks over a solved table");
    add_common(simulate, true);
    simulate->add_option("--rate-mode", cfg.rate_mode, "multi | single:<bps>")
        ->default_val("multi");
    simulate->add_option("--dest", cfg.dest, "destination node id");
    simulate->add_option("--source", cfg.source, "source node id");
    simulate->add_option("--trials", cfg.trials, "trial count")->default_val(100000);
    simulate->add_option("--cap", cfg.cap, "max transmissions per hop")
        ->default_val(kDefaultRetransmissionCap);
    simulate->add_option("--seed", cfg.seed, "simulation seed");

    CLI::App* eval = app.add_subcommand("eval", "all-pairs costs, gains, histograms, connectivity");
    add_common(eval, true);
    eval->add_option("--fixed-rate", cfg.fixed_rate,
                     "emit gains against this rate only (default: every rate)");

    CLI::App* gen = app.add_subcommand("gen", "write a synthetic topology");
    add_common(gen, false);
    gen->add_option("--nodes", cfg.gen_nodes, "node count")->required();
    gen->add_option("--rates", gen_rates_csv, "comma-joined bits/s")->required();
    gen->add_option("--density", cfg.gen_density, "link probability per rate")->default_val(0.3);
    gen->add_option("--ratio-law", cfg.gen_ratio_law, "ratio distribution")
        ->default_val("decaying");
    gen->add_option("--seed", cfg.seed, "generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!gen_rates_csv.empty())
            cfg.gen_rates = parse_rate_list(gen_rates_csv);
        if (solve->parsed())
            return cmd_solve(cfg);
        if (validate->parsed())
            return cmd_validate(cfg);
        if (simulate->parsed())
            return cmd_simulate(cfg);
        if (eval->parsed())
            return cmd_eval(cfg);
        if (gen->parsed())
            return cmd_gen(cfg);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace anypath
