#pragma once

// Experiment configuration and the end-to-end drivers behind the CLI:
// run (generate -> simulate -> measure -> write artifacts), replay
// (re-execute and compare against a recorded trace), and parameter sweeps.
//
// Config format: line-oriented key-value text with [sections], '#' comments,
// and strict validation (unknown sections or keys are errors). Every run
// writes instance.txt, graphs.txt, trace.csv, metrics.csv and summary.txt
// into its output directory; all numbers use shortest-round-trip formatting,
// and no timestamps are embedded, so equal configurations produce
// byte-identical artifacts.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dopd/algorithm.hpp"
#include "dopd/graph.hpp"
#include "dopd/metrics.hpp"
#include "dopd/problem.hpp"
#include "dopd/trace_io.hpp"

namespace dopd {

struct ConfigError : std::runtime_error {
    explicit ConfigError(int line, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line) + ": " + what) {}
    explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

struct ExperimentConfig {
    TrackingParams instance;
    double rho = 0.2;  // extra-edge probability per round

    StepsizeSchedule::Kind schedule_kind = StepsizeSchedule::Kind::StronglyConvex;
    double kappa = 0.5;
    double c = 0.5;  // general schedule only

    GeometryConfig geometry;

    bool phi_true_dynamics = false;            // identity vs the target dynamics
    RegPlacement placement = RegPlacement::Explicit;
    bool dual_bound_check = true;

    bool comparator_dynamic = true;
    bool comparator_static = false;
    enum class CheckpointKind { Log, All } checkpoints = CheckpointKind::Log;
    enum class SlaterMode { Auto, Off, Value } slater_mode = SlaterMode::Auto;
    double slater_value = 0.0;

    std::string out_dir = "out";
};

inline StepsizeSchedule make_schedule(const ExperimentConfig& cfg) {
    switch (cfg.schedule_kind) {
        case StepsizeSchedule::Kind::General:
            return StepsizeSchedule::general(cfg.c, cfg.kappa);
        case StepsizeSchedule::Kind::Slater:
            return StepsizeSchedule::slater(cfg.kappa);
        case StepsizeSchedule::Kind::StronglyConvex:
            return StepsizeSchedule::strongly_convex(cfg.kappa);
        case StepsizeSchedule::Kind::Custom:
            break;
    }
    throw ConfigError("custom schedules are not expressible in a config file");
}

inline void validate_config(const ExperimentConfig& cfg) {
    const TrackingParams& pr = cfg.instance;
    if (pr.n < 1 || pr.m < 1 || pr.p < 1 || pr.horizon < 1)
        throw ConfigError("instance sizes must be positive");
    if (!(pr.box_lo < pr.box_hi)) throw ConfigError("instance box is empty");
    if (!(pr.zeta2 > 0.0)) throw ConfigError("zeta2 must be positive");
    if (pr.zeta1 < 0.0 || pr.lambda1 < 0.0 || pr.lambda2 < 0.0)
        throw ConfigError("zeta1, lambda1, lambda2 must be nonnegative");
    if (cfg.rho < 0.0 || cfg.rho > 1.0) throw ConfigError("rho must lie in [0, 1]");
    if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) throw ConfigError("kappa must lie in (0, 1)");
    if (cfg.schedule_kind == StepsizeSchedule::Kind::General && !(cfg.c > 0.0 && cfg.c < 1.0))
        throw ConfigError("c must lie in (0, 1)");
    if (cfg.schedule_kind == StepsizeSchedule::Kind::Slater && cfg.phi_true_dynamics)
        throw ConfigError("the strictly-feasible schedule assumes the identity post-step mapping");
    if (cfg.geometry.kind == BregmanGeometry::Kind::KL)
        throw ConfigError("the tracking family runs on box domains; the KL geometry needs a simplex");
    if (!(cfg.geometry.sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (cfg.slater_mode == ExperimentConfig::SlaterMode::Value && !(cfg.slater_value > 0.0))
        throw ConfigError("slater_epsilon must be positive when given");
}

// ------------------------------------------------------------- config text

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, int line) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ConfigError(line, "bad numeric value '" + tok + "'");
    return v;
}

inline long long parse_int(const std::string& tok, int line) {
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ConfigError(line, "bad integer value '" + tok + "'");
    return v;
}

inline uint64_t parse_u64(const std::string& tok, int line) {
    uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ConfigError(line, "bad seed value '" + tok + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
            section = line.substr(1, line.size() - 2);
            static const std::set<std::string> known = {"instance", "schedule", "geometry",
                                                        "algorithm", "metrics",  "output"};
            if (!known.count(section)) throw ConfigError(lineno, "unknown section [" + section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError(lineno, "empty key or value");
        if (section.empty()) throw ConfigError(lineno, "key before any [section]");

        auto bad_key = [&]() { throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]"); };
        if (section == "instance") {
            if (key == "n")
                cfg.instance.n = static_cast<int>(detail::parse_int(val, lineno));
            else if (key == "m")
                cfg.instance.m = static_cast<int>(detail::parse_int(val, lineno));
            else if (key == "p")
                cfg.instance.p = static_cast<int>(detail::parse_int(val, lineno));
            else if (key == "T")
                cfg.instance.horizon = static_cast<int>(detail::parse_int(val, lineno));
            else if (key == "zeta1")
                cfg.instance.zeta1 = detail::parse_double(val, lineno);
            else if (key == "zeta2")
                cfg.instance.zeta2 = detail::parse_double(val, lineno);
            else if (key == "lambda1")
                cfg.instance.lambda1 = detail::parse_double(val, lineno);
            else if (key == "lambda2")
                cfg.instance.lambda2 = detail::parse_double(val, lineno);
            else if (key == "box_lo")
                cfg.instance.box_lo = detail::parse_double(val, lineno);
            else if (key == "box_hi")
                cfg.instance.box_hi = detail::parse_double(val, lineno);
            else if (key == "rho")
                cfg.rho = detail::parse_double(val, lineno);
            else if (key == "seed")
                cfg.instance.seed = detail::parse_u64(val, lineno);
            else
                bad_key();
        } else if (section == "schedule") {
            if (key == "kind") {
                if (val == "general")
                    cfg.schedule_kind = StepsizeSchedule::Kind::General;
                else if (val == "slater")
                    cfg.schedule_kind = StepsizeSchedule::Kind::Slater;
                else if (val == "strongly_convex")
                    cfg.schedule_kind = StepsizeSchedule::Kind::StronglyConvex;
                else
                    throw ConfigError(lineno, "schedule kind must be general|slater|strongly_convex");
            } else if (key == "kappa")
                cfg.kappa = detail::parse_double(val, lineno);
            else if (key == "c")
                cfg.c = detail::parse_double(val, lineno);
            else
                bad_key();
        } else if (section == "geometry") {
            if (key == "kind") {
                if (val == "scaled_euclidean")
                    cfg.geometry.kind = BregmanGeometry::Kind::ScaledEuclidean;
                else if (val == "kl")
                    cfg.geometry.kind = BregmanGeometry::Kind::KL;
                else
                    throw ConfigError(lineno, "geometry kind must be scaled_euclidean|kl");
            } else if (key == "sigma")
                cfg.geometry.sigma = detail::parse_double(val, lineno);
            else if (key == "kl_floor")
                cfg.geometry.kl_floor = detail::parse_double(val, lineno);
            else
                bad_key();
        } else if (section == "algorithm") {
            if (key == "phi") {
                if (val == "identity")
                    cfg.phi_true_dynamics = false;
                else if (val == "true_dynamics")
                    cfg.phi_true_dynamics = true;
                else
                    throw ConfigError(lineno, "phi must be identity|true_dynamics");
            } else if (key == "regularization") {
                if (val == "explicit")
                    cfg.placement = RegPlacement::Explicit;
                else if (val == "folded")
                    cfg.placement = RegPlacement::Folded;
                else
                    throw ConfigError(lineno, "regularization must be explicit|folded");
            } else if (key == "dual_bound_check") {
                if (val == "on")
                    cfg.dual_bound_check = true;
                else if (val == "off")
                    cfg.dual_bound_check = false;
                else
                    throw ConfigError(lineno, "dual_bound_check must be on|off");
            } else
                bad_key();
        } else if (section == "metrics") {
            if (key == "comparators") {
                cfg.comparator_dynamic = false;
                cfg.comparator_static = false;
                std::stringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    item = detail::trim(item);
                    if (item == "dynamic")
                        cfg.comparator_dynamic = true;
                    else if (item == "static")
                        cfg.comparator_static = true;
                    else
                        throw ConfigError(lineno, "comparators must list dynamic and/or static");
                }
            } else if (key == "checkpoints") {
                if (val == "log")
                    cfg.checkpoints = ExperimentConfig::CheckpointKind::Log;
                else if (val == "all")
                    cfg.checkpoints = ExperimentConfig::CheckpointKind::All;
                else
                    throw ConfigError(lineno, "checkpoints must be log|all");
            } else if (key == "slater_epsilon") {
                if (val == "auto")
                    cfg.slater_mode = ExperimentConfig::SlaterMode::Auto;
                else if (val == "off")
                    cfg.slater_mode = ExperimentConfig::SlaterMode::Off;
                else {
                    cfg.slater_mode = ExperimentConfig::SlaterMode::Value;
                    cfg.slater_value = detail::parse_double(val, lineno);
                }
            } else
                bad_key();
        } else if (section == "output") {
            if (key == "dir")
                cfg.out_dir = val;
            else
                bad_key();
        }
    }
    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config '" + path + "'");
    return parse_config(f);
}

// Canonical echo of a resolved configuration (embedded in every summary).
inline std::string config_to_string(const ExperimentConfig& cfg) {
    using detail::fmt_double;
    std::string s;
    s += "[instance]\n";
    s += "n = " + std::to_string(cfg.instance.n) + "\n";
    s += "m = " + std::to_string(cfg.instance.m) + "\n";
    s += "p = " + std::to_string(cfg.instance.p) + "\n";
    s += "T = " + std::to_string(cfg.instance.horizon) + "\n";
    s += "zeta1 = " + fmt_double(cfg.instance.zeta1) + "\n";
    s += "zeta2 = " + fmt_double(cfg.instance.zeta2) + "\n";
    s += "lambda1 = " + fmt_double(cfg.instance.lambda1) + "\n";
    s += "lambda2 = " + fmt_double(cfg.instance.lambda2) + "\n";
    s += "box_lo = " + fmt_double(cfg.instance.box_lo) + "\n";
    s += "box_hi = " + fmt_double(cfg.instance.box_hi) + "\n";
    s += "rho = " + fmt_double(cfg.rho) + "\n";
    s += "seed = " + std::to_string(cfg.instance.seed) + "\n";
    s += "[schedule]\n";
    s += std::string("kind = ") +
         (cfg.schedule_kind == StepsizeSchedule::Kind::General
              ? "general"
              : cfg.schedule_kind == StepsizeSchedule::Kind::Slater ? "slater" : "strongly_convex") +
         "\n";
    s += "kappa = " + fmt_double(cfg.kappa) + "\n";
    if (cfg.schedule_kind == StepsizeSchedule::Kind::General) s += "c = " + fmt_double(cfg.c) + "\n";
    s += "[geometry]\n";
    s += std::string("kind = ") +
         (cfg.geometry.kind == BregmanGeometry::Kind::ScaledEuclidean ? "scaled_euclidean" : "kl") + "\n";
    s += "sigma = " + fmt_double(cfg.geometry.sigma) + "\n";
    s += "[algorithm]\n";
    s += std::string("phi = ") + (cfg.phi_true_dynamics ? "true_dynamics" : "identity") + "\n";
    s += std::string("regularization = ") +
         (cfg.placement == RegPlacement::Explicit ? "explicit" : "folded") + "\n";
    s += std::string("dual_bound_check = ") + (cfg.dual_bound_check ? "on" : "off") + "\n";
    s += "[metrics]\n";
    s += std::string("comparators = ") +
         (cfg.comparator_dynamic && cfg.comparator_static
              ? "dynamic,static"
              : cfg.comparator_static ? "static" : "dynamic") +
         "\n";
    s += std::string("checkpoints = ") +
         (cfg.checkpoints == ExperimentConfig::CheckpointKind::Log ? "log" : "all") + "\n";
    s += std::string("slater_epsilon = ") +
         (cfg.slater_mode == ExperimentConfig::SlaterMode::Auto
              ? "auto"
              : cfg.slater_mode == ExperimentConfig::SlaterMode::Off ? "off"
                                                                     : fmt_double(cfg.slater_value)) +
         "\n";
    s += "[output]\n";
    s += "dir = " + cfg.out_dir + "\n";
    return s;
}

// Strictly increasing measurement rounds: a geometric grid (about eight per
// decade) from 10 up, the decade slices 100/500/1000 when they fit, and
// always the horizon itself. Short horizons measure every round.
inline std::vector<int> make_checkpoints(int horizon, ExperimentConfig::CheckpointKind kind) {
    std::set<int> pts;
    if (kind == ExperimentConfig::CheckpointKind::All || horizon <= 12) {
        for (int t = 1; t <= horizon; ++t) pts.insert(t);
    } else {
        double v = 10.0;
        while (v < horizon) {
            pts.insert(static_cast<int>(v + 0.5));
            v *= std::pow(10.0, 0.125);
        }
        for (int slice : {100, 500, 1000})
            if (slice <= horizon) pts.insert(slice);
        pts.insert(horizon);
    }
    return std::vector<int>(pts.begin(), pts.end());
}

// --------------------------------------------------------------- artifacts

struct ExperimentResult {
    ExperimentConfig config;
    TheoreticalConstants constants;
    std::vector<int> checkpoints;
    Vec regret_dynamic;       // per checkpoint
    Vec violation;            // per checkpoint
    Vec bound_regret;         // general-schedule bound per checkpoint
    Vec bound_violation;      // general-schedule bound per checkpoint
    Vec bound_regret_slater;      // only under the slater schedule with eps > 0
    Vec bound_violation_slater;   // "
    std::optional<double> slater_eps;
    std::optional<double> regret_static;  // final-horizon static regret when feasible
    bool static_feasible = false;
    std::string static_note;
    double variation_phi = 0.0;       // comparator variation against the run's mapping
    double variation_identity = 0.0;  // stacked-norm variation
    std::vector<std::string> warnings;
    Trace trace;
    std::shared_ptr<const TrackingInstance> instance;
};

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f.good()) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string trace_csv(const Trace& trace, int p, int m) {
    std::string s = "t,i,alpha,beta,gamma";
    for (int j = 0; j < p; ++j) s += ",x" + std::to_string(j);
    for (int k = 0; k < m; ++k) s += ",q" + std::to_string(k);
    s += ",round_cost";
    for (int k = 0; k < m; ++k) s += ",round_g" + std::to_string(k);
    s += "\n";
    for (const RoundTrace& rt : trace.rounds) {
        for (size_t i = 0; i < rt.agents.size(); ++i) {
            const AgentRoundTrace& ar = rt.agents[i];
            s += std::to_string(rt.t) + "," + std::to_string(i);
            s += "," + fmt_double(rt.alpha) + "," + fmt_double(rt.beta) + "," + fmt_double(rt.gamma);
            for (double v : ar.x) s += "," + fmt_double(v);
            for (double v : ar.q) s += "," + fmt_double(v);
            s += "," + fmt_double(rt.cost_sum);
            for (double v : rt.g_sum) s += "," + fmt_double(v);
            s += "\n";
        }
    }
    return s;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    ExperimentResult res;
    res.config = cfg;  // out_dir stays as configured: artifacts are location-independent

    auto inst = std::make_shared<const TrackingInstance>(generate_tracking_instance(cfg.instance));
    res.instance = inst;
    CommGraphSequence graphs = generate_graph_sequence(cfg.instance.n, cfg.rho, cfg.instance.horizon,
                                                       substream_seed(cfg.instance.seed, 2));
    TrackingProblem problem(inst, cfg.placement);
    StepsizeSchedule schedule = make_schedule(cfg);
    DynamicMapping mapping =
        cfg.phi_true_dynamics ? DynamicMapping::tracking_dynamics(inst) : DynamicMapping::identity();

    res.constants = estimate_constants(problem, cfg.geometry, graphs);

    RunOptions options;
    if (cfg.dual_bound_check) options.dual_bound = res.constants.F;
    res.trace = run_algorithm(problem, graphs, schedule, mapping, cfg.geometry, options);
    res.warnings = res.trace.warnings;

    const int T = cfg.instance.horizon;
    res.checkpoints = make_checkpoints(T, cfg.checkpoints);
    Trajectory xs = actions(res.trace);

    // Slater margin (for the strictly-feasible bound chain).
    double eps = 0.0;
    if (cfg.slater_mode == ExperimentConfig::SlaterMode::Value) {
        eps = cfg.slater_value;
        res.slater_eps = eps;
    } else if (cfg.slater_mode == ExperimentConfig::SlaterMode::Auto) {
        if (auto est = estimate_slater(problem, 64, substream_seed(cfg.instance.seed, 3))) {
            eps = est->margin;
            res.slater_eps = eps;
        }
    }
    res.constants = complete_constants(res.constants, schedule, eps);

    if (cfg.comparator_dynamic) {
        ComparatorSequence comp = dynamic_comparator(problem);
        res.regret_dynamic = regret_curve(problem, xs, comp.points, res.checkpoints);
        res.variation_phi = accumulated_variation(comp.points, mapping);
        res.variation_identity = accumulated_variation_identity(comp.points);
        // Prefix variations for checkpoint-resolved bounds.
        Vec var_phi_prefix(res.checkpoints.size(), 0.0);
        Vec var_id_prefix(res.checkpoints.size(), 0.0);
        {
            double acc_phi = 0.0, acc_id = 0.0;
            size_t next = 0;
            for (int t = 1; t <= T && next < res.checkpoints.size(); ++t) {
                if (t >= 2) {
                    const size_t t0 = static_cast<size_t>(t - 2);
                    double stacked = 0.0;
                    for (size_t i = 0; i < comp.points[t0].size(); ++i) {
                        Vec mapped = mapping.apply(static_cast<int>(i), t, comp.points[t0][i]);
                        acc_phi += norm2(sub(comp.points[t0 + 1][i], mapped));
                        Vec d = sub(comp.points[t0 + 1][i], comp.points[t0][i]);
                        stacked += dot(d, d);
                    }
                    acc_id += std::sqrt(stacked);
                }
                while (next < res.checkpoints.size() && res.checkpoints[next] == t) {
                    var_phi_prefix[next] = acc_phi;
                    var_id_prefix[next] = acc_id;
                    ++next;
                }
            }
        }
        res.bound_regret.resize(res.checkpoints.size());
        res.bound_violation.resize(res.checkpoints.size());
        const bool slater_bounds = cfg.schedule_kind == StepsizeSchedule::Kind::Slater && eps > 0.0;
        if (slater_bounds) {
            res.bound_regret_slater.resize(res.checkpoints.size());
            res.bound_violation_slater.resize(res.checkpoints.size());
        }
        for (size_t k = 0; k < res.checkpoints.size(); ++k) {
            BoundPair bp = theoretical_bounds(res.constants, StepsizeSchedule::Kind::General,
                                              res.checkpoints[k], var_phi_prefix[k]);
            res.bound_regret[k] = bp.regret_bound;
            res.bound_violation[k] = bp.violation_bound;
            if (slater_bounds) {
                BoundPair sp = theoretical_bounds(res.constants, StepsizeSchedule::Kind::Slater,
                                                  res.checkpoints[k], var_id_prefix[k]);
                res.bound_regret_slater[k] = sp.regret_bound;
                res.bound_violation_slater[k] = sp.violation_bound;
            }
        }
    }
    res.violation = violation_curve(problem, xs, res.checkpoints);

    if (cfg.comparator_static) {
        StaticOptimum so = static_optimum(problem);
        res.static_feasible = so.feasible;
        res.static_note = so.result.note.empty() ? "ok" : so.result.note;
        if (so.feasible) {
            ComparatorSequence comp = static_comparator(problem, so);
            res.regret_static = regret(problem, xs, comp.points);
        }
    }

    // ----- artifacts
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir + "/instance.txt", std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + out_dir + "/instance.txt' for writing");
        save_trace(*inst, f);
    }
    {
        std::ostringstream g;
        save_graph_sequence(graphs, g);
        detail::write_file(out_dir + "/graphs.txt", g.str());
    }
    detail::write_file(out_dir + "/trace.csv", detail::trace_csv(res.trace, cfg.instance.p, cfg.instance.m));

    {
        using detail::fmt_double;
        std::string s = "t";
        if (cfg.comparator_dynamic) s += ",reg_dyn,reg_dyn_per_t";
        s += ",violation,violation_per_t";
        if (cfg.comparator_dynamic) s += ",bound_regret,bound_violation";
        if (!res.bound_regret_slater.empty()) s += ",bound_regret_slater,bound_violation_slater";
        s += "\n";
        for (size_t k = 0; k < res.checkpoints.size(); ++k) {
            const double td = static_cast<double>(res.checkpoints[k]);
            s += std::to_string(res.checkpoints[k]);
            if (cfg.comparator_dynamic) {
                s += "," + fmt_double(res.regret_dynamic[k]) + "," + fmt_double(res.regret_dynamic[k] / td);
            }
            s += "," + fmt_double(res.violation[k]) + "," + fmt_double(res.violation[k] / td);
            if (cfg.comparator_dynamic) {
                s += "," + fmt_double(res.bound_regret[k]) + "," + fmt_double(res.bound_violation[k]);
            }
            if (!res.bound_regret_slater.empty()) {
                s += "," + fmt_double(res.bound_regret_slater[k]) + "," +
                     fmt_double(res.bound_violation_slater[k]);
            }
            s += "\n";
        }
        detail::write_file(out_dir + "/metrics.csv", s);
    }

    {
        using detail::fmt_double;
        std::string s;
        s += "# resolved configuration\n";
        s += config_to_string(res.config);
        s += "# constants\n";
        const TheoreticalConstants& tc = res.constants;
        s += "F = " + fmt_double(tc.F) + "\n";
        s += "G = " + fmt_double(tc.G) + "\n";
        s += "K = " + fmt_double(tc.K) + "\n";
        s += "diam = " + fmt_double(tc.diam) + "\n";
        s += "sigma_lb = " + fmt_double(tc.sigma_lb) + "\n";
        s += "mu_lb = " + fmt_double(tc.mu_lb) + "\n";
        s += "w = " + fmt_double(tc.w) + "\n";
        s += "iota = " + std::to_string(tc.iota) + "\n";
        s += "tau = " + fmt_double(tc.tau) + "\n";
        s += "lambda = " + fmt_double(tc.lambda) + "\n";
        s += "B1 = " + fmt_double(tc.B1) + "\n";
        s += "C11 = " + fmt_double(tc.C11) + "\n";
        s += "C12 = " + fmt_double(tc.C12) + "\n";
        s += "c = " + fmt_double(tc.c) + "\n";
        s += "kappa = " + fmt_double(tc.kappa) + "\n";
        s += "C1 = " + fmt_double(tc.C1) + "\n";
        s += "C21 = " + fmt_double(tc.C21) + "\n";
        s += "C2 = " + fmt_double(tc.C2) + "\n";
        if (tc.eps > 0.0) {
            s += "eps = " + fmt_double(tc.eps) + "\n";
            s += "B3 = " + fmt_double(tc.B3) + "\n";
            s += "B2 = " + fmt_double(tc.B2) + "\n";
            s += "C3 = " + fmt_double(tc.C3) + "\n";
        }
        if (tc.mu_lb > 0.0) {
            s += "B4 = " + fmt_double(tc.B4) + "\n";
            s += "C4 = " + fmt_double(tc.C4) + "\n";
        }
        s += "# results\n";
        s += "T = " + std::to_string(T) + "\n";
        if (cfg.comparator_dynamic && !res.regret_dynamic.empty()) {
            s += "regret_dynamic = " + fmt_double(res.regret_dynamic.back()) + "\n";
            s += "variation_phi = " + fmt_double(res.variation_phi) + "\n";
            s += "variation_identity = " + fmt_double(res.variation_identity) + "\n";
        }
        s += "violation = " + fmt_double(res.violation.empty() ? 0.0 : res.violation.back()) + "\n";
        if (res.slater_eps) s += "slater_eps = " + fmt_double(*res.slater_eps) + "\n";
        if (cfg.comparator_static) {
            s += std::string("static_feasible = ") + (res.static_feasible ? "yes" : "no") + "\n";
            s += "static_note = " + res.static_note + "\n";
            if (res.regret_static) s += "regret_static = " + fmt_double(*res.regret_static) + "\n";
        }
        if (!res.warnings.empty()) {
            s += "# warnings\n";
            for (const std::string& w : res.warnings) s += "warning = " + w + "\n";
        }
        detail::write_file(out_dir + "/summary.txt", s);
    }

    return res;
}

// ------------------------------------------------------------------ replay

struct ReplayReport {
    bool ok = true;
    std::string message = "trace matches the recorded run";
};

// Re-executes the engine from the configuration and compares every numeric
// field of the recorded per-round CSV within 1e-12.
inline ReplayReport replay(const ExperimentConfig& cfg, const std::string& trace_csv_path) {
    validate_config(cfg);
    auto inst = std::make_shared<const TrackingInstance>(generate_tracking_instance(cfg.instance));
    CommGraphSequence graphs = generate_graph_sequence(cfg.instance.n, cfg.rho, cfg.instance.horizon,
                                                       substream_seed(cfg.instance.seed, 2));
    TrackingProblem problem(inst, cfg.placement);
    StepsizeSchedule schedule = make_schedule(cfg);
    DynamicMapping mapping =
        cfg.phi_true_dynamics ? DynamicMapping::tracking_dynamics(inst) : DynamicMapping::identity();
    RunOptions options;  // invariant checks on, dual bound off (not needed to reproduce)
    Trace trace = run_algorithm(problem, graphs, schedule, mapping, cfg.geometry, options);
    std::string expected = detail::trace_csv(trace, cfg.instance.p, cfg.instance.m);

    std::ifstream f(trace_csv_path);
    if (!f) return {false, "cannot open trace '" + trace_csv_path + "'"};
    std::istringstream exp_stream(expected);
    std::string got_line, exp_line;
    int lineno = 0;
    while (true) {
        const bool got_more = static_cast<bool>(std::getline(f, got_line));
        const bool exp_more = static_cast<bool>(std::getline(exp_stream, exp_line));
        ++lineno;
        if (!got_more && !exp_more) break;
        if (!got_more || !exp_more)
            return {false, "trace length differs from the re-executed run at line " + std::to_string(lineno)};
        if (lineno == 1) {
            if (got_line != exp_line) return {false, "trace header does not match this configuration"};
            continue;
        }
        if (got_line == exp_line) continue;
        // Field-by-field numeric comparison within 1e-12.
        std::stringstream gs(got_line), es(exp_line);
        std::string gtok, etok;
        int field = 0;
        while (true) {
            const bool g_more = static_cast<bool>(std::getline(gs, gtok, ','));
            const bool e_more = static_cast<bool>(std::getline(es, etok, ','));
            if (!g_more && !e_more) break;
            ++field;
            if (!g_more || !e_more)
                return {false, "line " + std::to_string(lineno) + ": field count differs"};
            if (gtok == etok) continue;
            double gv = 0.0, ev = 0.0;
            auto g_res = std::from_chars(gtok.data(), gtok.data() + gtok.size(), gv);
            auto e_res = std::from_chars(etok.data(), etok.data() + etok.size(), ev);
            const bool g_ok = g_res.ec == std::errc() && g_res.ptr == gtok.data() + gtok.size();
            const bool e_ok = e_res.ec == std::errc() && e_res.ptr == etok.data() + etok.size();
            if (!g_ok || !e_ok || std::fabs(gv - ev) > 1e-12)
                return {false, "divergence at line " + std::to_string(lineno) + ", field " +
                                   std::to_string(field) + ": recorded '" + gtok + "', re-executed '" +
                                   etok + "'"};
        }
    }
    return {};
}

// ------------------------------------------------------------------- sweep

// Runs the experiment once per value of a single parameter, each into its own
// subdirectory, in parallel, then writes a combined slice table.
inline void run_sweep(const ExperimentConfig& base, const std::string& param,
                      const std::vector<std::string>& value_tokens, const std::string& out_root) {
    if (value_tokens.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<ExperimentConfig> cfgs;
    for (const std::string& tok : value_tokens) {
        ExperimentConfig cfg = base;
        if (param == "kappa")
            cfg.kappa = detail::parse_double(tok, 0);
        else if (param == "c")
            cfg.c = detail::parse_double(tok, 0);
        else if (param == "rho")
            cfg.rho = detail::parse_double(tok, 0);
        else if (param == "sigma")
            cfg.geometry.sigma = detail::parse_double(tok, 0);
        else if (param == "seed")
            cfg.instance.seed = detail::parse_u64(tok, 0);
        else
            throw ConfigError("unknown sweep parameter '" + param + "' (kappa|c|rho|sigma|seed)");
        validate_config(cfg);
        cfgs.push_back(std::move(cfg));
    }
    std::filesystem::create_directories(out_root);
    std::vector<std::future<ExperimentResult>> jobs;
    std::vector<std::string> dirs;
    for (size_t k = 0; k < cfgs.size(); ++k) {
        dirs.push_back(out_root + "/" + param + "_" + value_tokens[k]);
        jobs.push_back(std::async(std::launch::async, run_experiment, cfgs[k], dirs.back()));
    }
    std::vector<ExperimentResult> results;
    for (auto& j : jobs) results.push_back(j.get());

    using detail::fmt_double;
    std::string s = param + ",t,reg_dyn,reg_dyn_per_t,violation,violation_per_t\n";
    for (size_t k = 0; k < results.size(); ++k) {
        const ExperimentResult& r = results[k];
        std::set<int> slices;
        for (int slice : {100, 500, 1000})
            if (slice <= r.config.instance.horizon) slices.insert(slice);
        slices.insert(r.config.instance.horizon);
        for (size_t idx = 0; idx < r.checkpoints.size(); ++idx) {
            if (!slices.count(r.checkpoints[idx])) continue;
            const double td = static_cast<double>(r.checkpoints[idx]);
            s += value_tokens[k] + "," + std::to_string(r.checkpoints[idx]);
            if (!r.regret_dynamic.empty())
                s += "," + fmt_double(r.regret_dynamic[idx]) + "," + fmt_double(r.regret_dynamic[idx] / td);
            else
                s += ",,";
            s += "," + fmt_double(r.violation[idx]) + "," + fmt_double(r.violation[idx] / td) + "\n";
        }
    }
    detail::write_file(out_root + "/combined.csv", s);
}

}  // namespace dopd
