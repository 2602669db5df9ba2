// Command-line front end for the distributed online primal-dual simulator.
//
// Subcommands:
//   run         execute a configured experiment and write its artifact set
//   replay      re-execute a recorded run and verify the trace to 1e-12
//   sweep       run one experiment per value of a parameter, in parallel
//   check-graph generate a communication-graph sequence and audit it
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 engine
// invariant violation, 4 replay or graph verification failure.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dopd/dopd.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            long long seed_override) {
    dopd::ExperimentConfig cfg = dopd::parse_config_file(config_path);
    if (seed_override >= 0) cfg.instance.seed = static_cast<uint64_t>(seed_override);
    std::string out = out_override.empty() ? cfg.out_dir : out_override;
    dopd::ExperimentResult res = dopd::run_experiment(cfg, out);
    std::cout << "wrote " << out << "/{instance.txt,graphs.txt,trace.csv,metrics.csv,summary.txt}\n";
    if (!res.regret_dynamic.empty()) {
        std::cout << "T=" << cfg.instance.horizon << " regret_dynamic=" << res.regret_dynamic.back()
                  << " violation=" << res.violation.back() << "\n";
    } else {
        std::cout << "T=" << cfg.instance.horizon << " violation="
                  << (res.violation.empty() ? 0.0 : res.violation.back()) << "\n";
    }
    for (const std::string& w : res.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& trace_path,
               long long seed_override) {
    dopd::ExperimentConfig cfg = dopd::parse_config_file(config_path);
    if (seed_override >= 0) cfg.instance.seed = static_cast<uint64_t>(seed_override);
    dopd::ReplayReport rep = dopd::replay(cfg, trace_path);
    std::cout << (rep.ok ? "replay ok: " : "replay FAILED: ") << rep.message << "\n";
    return rep.ok ? 0 : 4;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv, const std::string& out_root) {
    dopd::ExperimentConfig cfg = dopd::parse_config_file(config_path);
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) values.push_back(tok);
    std::string root = out_root.empty() ? cfg.out_dir + "/sweep_" + param : out_root;
    dopd::run_sweep(cfg, param, values, root);
    std::cout << "wrote " << root << "/combined.csv and " << values.size() << " run directories\n";
    return 0;
}

int cmd_check_graph(const std::string& config_path, const std::string& load_path) {
    dopd::CommGraphSequence seq;
    if (!load_path.empty()) {
        seq = dopd::load_graph_sequence(load_path);
    } else {
        dopd::ExperimentConfig cfg = dopd::parse_config_file(config_path);
        seq = dopd::generate_graph_sequence(cfg.instance.n, cfg.rho, cfg.instance.horizon,
                                            dopd::substream_seed(cfg.instance.seed, 2));
    }
    dopd::GraphCheckReport rep = dopd::check_assumption1(seq);
    std::cout << "n=" << seq.n << " rounds=" << seq.rounds.size() << " weight_floor=" << seq.weight_floor
              << " window=" << seq.window << "\n";
    if (rep.ok) {
        std::cout << "graph sequence ok: doubly stochastic, floor-respecting, jointly connected\n";
        return 0;
    }
    std::cout << "graph sequence FAILED";
    if (rep.round > 0) std::cout << " at round " << rep.round;
    std::cout << ": " << rep.message << "\n";
    return 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed online primal-dual mirror descent simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, trace_path, param, values_csv, load_path;
    long long seed_override = -1;

    CLI::App* run = app.add_subcommand("run", "execute an experiment from a config file");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    run->add_option("--seed", seed_override, "seed override");

    CLI::App* rep = app.add_subcommand("replay", "re-execute and verify a recorded trace");
    rep->add_option("--config", config_path, "experiment config file")->required();
    rep->add_option("--trace", trace_path, "recorded trace.csv")->required();
    rep->add_option("--seed", seed_override, "seed override");

    CLI::App* sw = app.add_subcommand("sweep", "run one experiment per parameter value");
    sw->add_option("--config", config_path, "experiment config file")->required();
    sw->add_option("--param", param, "kappa|c|rho|sigma|seed")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    sw->add_option("--out", out_dir, "sweep output root");

    CLI::App* cg = app.add_subcommand("check-graph", "audit a communication-graph sequence");
    cg->add_option("--config", config_path, "experiment config file");
    cg->add_option("--load", load_path, "saved graph sequence to audit instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed_override);
        if (rep->parsed()) return cmd_replay(config_path, trace_path, seed_override);
        if (sw->parsed()) return cmd_sweep(config_path, param, values_csv, out_dir);
        if (cg->parsed()) {
            if (config_path.empty() && load_path.empty()) {
                std::cerr << "check-graph needs --config or --load\n";
                return 1;
            }
            return cmd_check_graph(config_path, load_path);
        }
    } catch (const dopd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dopd::EngineViolation& e) {
        std::cerr << "engine violation: " << e.what() << "\n";
        return 3;
    } catch (const dopd::GraphParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dopd::TraceParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
