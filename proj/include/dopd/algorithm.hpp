#pragma once

// The distributed online primal-dual mirror-descent round and its driver.
//
// Round t for agent i (all data one round stale, revealed after acting):
//   mix     q~_i = sum_j [W_{t-1}]_{ij} q_{j,t-1}
//   lean    a_i  = cost_grad + g_jac^T q~_i
//   step    x~_i = argmin_{x in X_i} alpha_t*<a_i,x> + alpha_t*r(x) + D_psi(x, x_prev)
//   probe   b_i  = g_jac (x~_i - x_prev) + g_val
//   dual    q_i  = [ q~_i + gamma_t (b_i - beta_t q~_i) ]_+
//   act     x_i  = Phi_{i,t}(x~_i)
// Round 1 is inert on the primal side: the round-0 functions are identically
// zero and all duals start at zero.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dopd/bregman.hpp"
#include "dopd/graph.hpp"
#include "dopd/linalg.hpp"
#include "dopd/problem.hpp"
#include "dopd/rng.hpp"

namespace dopd {

// ------------------------------------------------------------- step sizes

struct StepTriple {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

struct StepsizeSchedule {
    enum class Kind { General, Slater, StronglyConvex, Custom };

    Kind kind = Kind::General;
    double c = 0.5;      // primal decay exponent (General only)
    double kappa = 0.5;  // dual decay exponent
    Vec custom_alpha, custom_beta, custom_gamma;

    static StepsizeSchedule general(double c, double kappa) {
        check_exponent(c, "c");
        check_exponent(kappa, "kappa");
        StepsizeSchedule s;
        s.kind = Kind::General;
        s.c = c;
        s.kappa = kappa;
        return s;
    }

    // Strictly feasible (Slater) tuning: alpha = gamma = t^{-(1-kappa)}. Only
    // sound with the identity post-step mapping.
    static StepsizeSchedule slater(double kappa) {
        check_exponent(kappa, "kappa");
        StepsizeSchedule s;
        s.kind = Kind::Slater;
        s.kappa = kappa;
        s.c = 1.0 - kappa;
        return s;
    }

    static StepsizeSchedule strongly_convex(double kappa) {
        check_exponent(kappa, "kappa");
        StepsizeSchedule s;
        s.kind = Kind::StronglyConvex;
        s.kappa = kappa;
        s.c = std::max(1.0 - kappa, kappa);
        return s;
    }

    static StepsizeSchedule custom(Vec alpha, Vec beta, Vec gamma) {
        StepsizeSchedule s;
        s.kind = Kind::Custom;
        if (alpha.empty() || alpha.size() != beta.size() || beta.size() != gamma.size())
            throw std::invalid_argument("StepsizeSchedule::custom: sequences must be nonempty, equal length");
        auto check_seq = [](const Vec& v, const char* name) {
            for (size_t t = 0; t < v.size(); ++t) {
                if (!(v[t] > 0.0))
                    throw std::invalid_argument(std::string("StepsizeSchedule::custom: ") + name +
                                                " must be positive");
                if (t > 0 && v[t] > v[t - 1])
                    throw std::invalid_argument(std::string("StepsizeSchedule::custom: ") + name +
                                                " must be non-increasing");
            }
        };
        check_seq(alpha, "alpha");
        check_seq(beta, "beta");
        check_seq(gamma, "gamma");
        s.custom_alpha = std::move(alpha);
        s.custom_beta = std::move(beta);
        s.custom_gamma = std::move(gamma);
        return s;
    }

    StepTriple at(int t) const {
        if (t < 1) throw std::invalid_argument("StepsizeSchedule::at: t must be >= 1");
        const double td = static_cast<double>(t);
        switch (kind) {
            case Kind::General:
                return {1.0 / std::pow(td, c), 1.0 / std::pow(td, kappa), 1.0 / std::pow(td, 1.0 - kappa)};
            case Kind::Slater: {
                double ag = 1.0 / std::pow(td, 1.0 - kappa);
                return {ag, 1.0 / std::pow(td, kappa), ag};
            }
            case Kind::StronglyConvex:
                return {1.0 / std::pow(td, std::max(1.0 - kappa, kappa)), 1.0 / std::pow(td, kappa),
                        1.0 / std::pow(td, 1.0 - kappa)};
            case Kind::Custom: {
                if (t > static_cast<int>(custom_alpha.size()))
                    throw std::invalid_argument("StepsizeSchedule::at: t beyond the custom horizon");
                size_t k = static_cast<size_t>(t - 1);
                return {custom_alpha[k], custom_beta[k], custom_gamma[k]};
            }
        }
        throw std::logic_error("StepsizeSchedule::at: unreachable");
    }

  private:
    static void check_exponent(double v, const char* name) {
        if (!(v > 0.0) || !(v < 1.0))
            throw std::invalid_argument(std::string("StepsizeSchedule: ") + name + " must lie in (0, 1)");
    }
};

// --------------------------------------------------------- dynamic mapping

// Post-step mapping Phi_{i,t}: X_i -> X_i. The round-1 mapping is the
// identity (there are no prior dynamics to apply).
class DynamicMapping {
  public:
    enum class Kind { Identity, Linear, Custom };

    using MatrixProvider = std::function<const Mat&(int agent, int t)>;
    using CustomFn = std::function<Vec(int agent, int t, const Vec&)>;

    static DynamicMapping identity() { return DynamicMapping(); }

    // Linear maps x -> clamp(A_{i,t} x); the provider must serve t = 2..T.
    // The clamp keeps ~1 ulp of matrix-vector rounding from escaping the box.
    static DynamicMapping linear(MatrixProvider provider, std::vector<Domain> domains) {
        DynamicMapping m;
        m.kind_ = Kind::Linear;
        m.provider_ = std::move(provider);
        m.domains_ = std::move(domains);
        return m;
    }

    // True target dynamics of a tracking instance: Phi_{i,t} = A_{i,t-1}.
    static DynamicMapping tracking_dynamics(std::shared_ptr<const TrackingInstance> inst) {
        std::vector<Domain> domains(static_cast<size_t>(inst->params.n),
                                    Domain::box_uniform(inst->params.p, inst->params.box_lo,
                                                        inst->params.box_hi));
        auto provider = [inst](int agent, int t) -> const Mat& {
            return inst->A[inst->dyn_at(t - 1, agent)];
        };
        return linear(std::move(provider), std::move(domains));
    }

    static DynamicMapping custom(CustomFn fn) {
        DynamicMapping m;
        m.kind_ = Kind::Custom;
        m.custom_ = std::move(fn);
        return m;
    }

    Kind kind() const { return kind_; }

    Vec apply(int agent, int t, const Vec& x) const {
        if (t <= 1) return x;
        switch (kind_) {
            case Kind::Identity:
                return x;
            case Kind::Linear: {
                const Mat& a = provider_(agent, t);
                return project_domain(domains_[static_cast<size_t>(agent)], matvec(a, x));
            }
            case Kind::Custom:
                return custom_(agent, t, x);
        }
        throw std::logic_error("DynamicMapping::apply: unreachable");
    }

    const Mat& matrix(int agent, int t) const {
        if (kind_ != Kind::Linear) throw std::logic_error("DynamicMapping::matrix: not a linear mapping");
        return provider_(agent, t);
    }

  private:
    Kind kind_ = Kind::Identity;
    MatrixProvider provider_;
    std::vector<Domain> domains_;
    CustomFn custom_;
};

// Samples pairs and rounds to screen a mapping for the contraction property
// D(Phi x, Phi y) <= D(x, y); returns human-readable findings (empty = clean).
// Linear maps additionally get a power-iteration check of ||A||_2 <= 1.
inline std::vector<std::string> check_contractivity(const DynamicMapping& map,
                                                    const std::vector<BregmanGeometry>& geoms, int horizon,
                                                    uint64_t seed, int samples = 1000) {
    std::vector<std::string> findings;
    if (map.kind() == DynamicMapping::Kind::Identity) return findings;
    Rng rng(seed);
    const int n = static_cast<int>(geoms.size());
    auto sample_point = [&](const Domain& d) {
        Vec x(static_cast<size_t>(d.dim));
        if (d.kind == Domain::Kind::Box) {
            for (int j = 0; j < d.dim; ++j)
                x[static_cast<size_t>(j)] = rng.uniform(d.lo[static_cast<size_t>(j)], d.hi[static_cast<size_t>(j)]);
        } else {
            x = rng.simplex_point(d.dim);
        }
        return x;
    };
    if (map.kind() == DynamicMapping::Kind::Linear) {
        const int probes = std::min(samples, 100);
        for (int k = 0; k < probes; ++k) {
            int i = static_cast<int>(rng.uniform_int(0, n - 1));
            int t = horizon >= 2 ? static_cast<int>(rng.uniform_int(2, horizon)) : 2;
            const Mat& a = map.matrix(i, t);
            // Power iteration on A^T A estimates the spectral norm.
            Vec v(static_cast<size_t>(a.cols));
            for (auto& e : v) e = rng.uniform(-1.0, 1.0);
            double nv = norm2(v);
            for (auto& e : v) e /= nv;
            double est = 0.0;
            for (int it = 0; it < 50; ++it) {
                Vec w = mat_tvec(a, matvec(a, v));
                est = std::sqrt(std::max(0.0, dot(w, v)));
                double nw = norm2(w);
                if (nw == 0.0) break;
                for (size_t j = 0; j < v.size(); ++j) v[j] = w[j] / nw;
            }
            if (est > 1.0 + 1e-9)
                findings.push_back("linear mapping for agent " + std::to_string(i) + " at round " +
                                   std::to_string(t) + " has spectral norm " + std::to_string(est) + " > 1");
        }
        return findings;
    }
    for (int k = 0; k < samples; ++k) {
        int i = static_cast<int>(rng.uniform_int(0, n - 1));
        int t = horizon >= 2 ? static_cast<int>(rng.uniform_int(2, horizon)) : 2;
        const BregmanGeometry& g = geoms[static_cast<size_t>(i)];
        Vec x = sample_point(g.domain), y = sample_point(g.domain);
        Vec fx = map.apply(i, t, x), fy = map.apply(i, t, y);
        double before = bregman_divergence(g, x, y);
        double after = bregman_divergence(g, fx, fy);
        if (after > before + 1e-12) {
            findings.push_back("custom mapping expands divergence at agent " + std::to_string(i) +
                               ", round " + std::to_string(t) + ": " + std::to_string(after) + " > " +
                               std::to_string(before));
            if (findings.size() >= 16) break;
        }
    }
    return findings;
}

// --------------------------------------------------------------- the round

// Data revealed to an agent at the start of round t: the previous round's
// subgradients and constraint values at its own previous action, plus the
// structured regularizer the step keeps un-linearized.
struct Subgradients {
    Vec cost_grad;  // grad f_{i,t-1}(x_{i,t-1})
    Mat g_jac;      // Jacobian of g_{i,t-1} at x_{i,t-1}
    Vec g_val;      // g_{i,t-1}(x_{i,t-1})
    RegularizerSpec reg;

    static Subgradients zero(int p, int m) {
        Subgradients s;
        s.cost_grad.assign(static_cast<size_t>(p), 0.0);
        s.g_jac = Mat(m, p, 0.0);
        s.g_val.assign(static_cast<size_t>(m), 0.0);
        return s;
    }
};

struct AgentState {
    Vec x;  // last committed action
    Vec q;  // local dual iterate
};

struct AgentRoundTrace {
    Vec q_tilde;  // mixed dual this round
    Vec a;        // leaned-on subgradient
    Vec x_tilde;  // mirror-step output
    Vec b;        // linearized constraint probe
    Vec q;        // updated dual
    Vec x;        // committed action (after the dynamic mapping)
    double grad_bound = 0.0;  // ||grad h|| bound certifying the step deviation
};

// One agent's full round given its mixed dual. Pure: no shared state.
inline std::pair<AgentState, AgentRoundTrace> agent_round(const AgentState& state, const Subgradients& revealed,
                                                          const Vec& q_tilde, const StepTriple& steps,
                                                          const BregmanGeometry& geom,
                                                          const std::function<Vec(const Vec&)>& phi,
                                                          const MirrorStepOptions& opt = {}) {
    AgentRoundTrace tr;
    tr.q_tilde = q_tilde;
    tr.a = revealed.cost_grad;
    Vec lever = mat_tvec(revealed.g_jac, q_tilde);
    for (size_t j = 0; j < tr.a.size(); ++j) tr.a[j] += lever[j];
    tr.x_tilde = mirror_step(geom, state.x, tr.a, revealed.reg, steps.alpha, opt);
    tr.grad_bound = step_subgradient_bound(geom.domain, tr.a, revealed.reg, steps.alpha);
    Vec diff = sub(tr.x_tilde, state.x);
    tr.b = matvec(revealed.g_jac, diff);
    for (size_t k = 0; k < tr.b.size(); ++k) tr.b[k] += revealed.g_val[k];
    Vec qn(q_tilde.size());
    for (size_t k = 0; k < q_tilde.size(); ++k)
        qn[k] = q_tilde[k] + steps.gamma * (tr.b[k] - steps.beta * q_tilde[k]);
    tr.q = nonneg_project(std::move(qn));
    tr.x = phi(tr.x_tilde);
    AgentState next{tr.x, tr.q};
    return {std::move(next), std::move(tr)};
}

// ------------------------------------------------------------------ driver

struct RoundTrace {
    int t = 0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    std::vector<AgentRoundTrace> agents;
    std::vector<Edge> edges;  // communication links used this round
    double cost_sum = 0.0;    // sum_i (f_{i,t} + r_{i,t})(x_{i,t})
    Vec g_sum;                // sum_i g_{i,t}(x_{i,t})
};

struct Trace {
    int n = 0, m = 0, horizon = 0;
    std::vector<RoundTrace> rounds;
    std::vector<std::string> warnings;
};

struct EngineViolation : std::runtime_error {
    int t;
    int agent;
    EngineViolation(int t_, int agent_, const std::string& what)
        : std::runtime_error("round " + std::to_string(t_) + ", agent " + std::to_string(agent_) + ": " + what),
          t(t_),
          agent(agent_) {}
};

struct GeometryConfig {
    BregmanGeometry::Kind kind = BregmanGeometry::Kind::ScaledEuclidean;
    double sigma = 10.0;      // ScaledEuclidean scale
    double kl_floor = 1e-3;   // KL interior sampling floor
};

inline std::vector<BregmanGeometry> make_geometries(const OnlineProblem& problem, const GeometryConfig& cfg) {
    std::vector<BregmanGeometry> geoms;
    geoms.reserve(static_cast<size_t>(problem.num_agents()));
    for (int i = 0; i < problem.num_agents(); ++i) {
        const Domain& d = problem.domain(i);
        if (cfg.kind == BregmanGeometry::Kind::ScaledEuclidean) {
            geoms.push_back(BregmanGeometry::scaled_euclidean(cfg.sigma, d));
        } else {
            if (d.kind != Domain::Kind::Simplex)
                throw std::invalid_argument("make_geometries: KL geometry requires simplex domains");
            geoms.push_back(BregmanGeometry::kl(d.dim, cfg.kl_floor));
        }
    }
    return geoms;
}

struct RunOptions {
    std::optional<std::vector<Vec>> x_init;  // default: per-agent domain midpoint
    std::optional<double> dual_bound;        // F: enforce ||q|| <= F/beta_t exactly
    bool check_invariants = true;
    bool check_contractivity = true;
    bool halt_on_violation = true;
    MirrorStepOptions mirror_opts;
};

// Runs the full horizon. Single-threaded and in fixed agent order; the
// agent_round calls within one round are data-independent of each other, so
// the output does not depend on that order.
inline Trace run_algorithm(const OnlineProblem& problem, const CommGraphSequence& graphs,
                           const StepsizeSchedule& schedule, const DynamicMapping& mapping,
                           const GeometryConfig& geometry, const RunOptions& options = {}) {
    const int n = problem.num_agents();
    const int m = problem.constraint_dim();
    const int T = problem.horizon();
    if (graphs.n != n) throw std::invalid_argument("run_algorithm: graph sequence is for a different n");
    if (static_cast<int>(graphs.weights.size()) < T)
        throw std::invalid_argument("run_algorithm: graph sequence shorter than the horizon");

    std::vector<BregmanGeometry> geoms = make_geometries(problem, geometry);

    Trace trace;
    trace.n = n;
    trace.m = m;
    trace.horizon = T;

    if (options.check_contractivity) {
        for (std::string& w : check_contractivity(mapping, geoms, T, /*seed=*/0x5eed))
            trace.warnings.push_back(std::move(w));
        if (!trace.warnings.empty() && options.halt_on_violation)
            throw std::invalid_argument("run_algorithm: dynamic mapping failed the contraction screen: " +
                                        trace.warnings.front());
    }

    std::vector<AgentState> states(static_cast<size_t>(n));
    std::vector<Subgradients> revealed(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Domain& d = problem.domain(i);
        Vec x0 = options.x_init ? (*options.x_init)[static_cast<size_t>(i)] : d.midpoint();
        if (!d.contains(x0)) throw std::invalid_argument("run_algorithm: initial point outside the domain");
        states[static_cast<size_t>(i)] = {std::move(x0), Vec(static_cast<size_t>(m), 0.0)};
        revealed[static_cast<size_t>(i)] = Subgradients::zero(problem.dim(i), m);
    }

    auto flag = [&](int t, int i, const std::string& what) {
        if (options.halt_on_violation) throw EngineViolation(t, i, what);
        trace.warnings.push_back("round " + std::to_string(t) + ", agent " + std::to_string(i) + ": " + what);
    };

    trace.rounds.reserve(static_cast<size_t>(T));
    std::vector<Vec> duals(static_cast<size_t>(n));
    for (int t = 1; t <= T; ++t) {
        const StepTriple steps = schedule.at(t);
        const Mat& w = graphs.weights[static_cast<size_t>(t - 1)];
        for (int i = 0; i < n; ++i) duals[static_cast<size_t>(i)] = states[static_cast<size_t>(i)].q;
        std::vector<Vec> mixed = mix_duals(w, duals);

        RoundTrace rt;
        rt.t = t;
        rt.alpha = steps.alpha;
        rt.beta = steps.beta;
        rt.gamma = steps.gamma;
        rt.edges = graphs.rounds[static_cast<size_t>(t - 1)];
        rt.agents.resize(static_cast<size_t>(n));
        rt.g_sum.assign(static_cast<size_t>(m), 0.0);

        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            auto phi = [&](const Vec& v) { return mapping.apply(i, t, v); };
            auto [next, row] = agent_round(states[si], revealed[si], mixed[si], steps, geoms[si], phi,
                                           options.mirror_opts);
            if (options.check_invariants) {
                const Domain& d = problem.domain(i);
                if (!d.contains(row.x_tilde)) flag(t, i, "mirror-step output left the domain");
                if (!d.contains(row.x)) flag(t, i, "post-mapping action left the domain");
                for (double qv : row.q)
                    if (qv < 0.0) flag(t, i, "dual iterate has a negative entry");
                if (!mirror_step_deviation(geoms[si], states[si].x, row.x_tilde, row.grad_bound))
                    flag(t, i,
                         "primal step moved farther than its subgradient bound allows (" +
                             std::to_string(norm2(sub(row.x_tilde, states[si].x))) + " vs " +
                             std::to_string(row.grad_bound / geoms[si].strong_convexity()) + ")");
                if (options.dual_bound) {
                    const double cap = *options.dual_bound / steps.beta;
                    if (norm2(row.q_tilde) > cap)
                        flag(t, i, "mixed dual norm " + std::to_string(norm2(row.q_tilde)) +
                                       " exceeds F/beta = " + std::to_string(cap));
                    if (norm2(row.q) > cap)
                        flag(t, i, "dual norm " + std::to_string(norm2(row.q)) +
                                       " exceeds F/beta = " + std::to_string(cap));
                }
            }
            states[si] = std::move(next);
            rt.agents[si] = std::move(row);
        }

        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const Vec& xi = states[si].x;
            CostEval ce = problem.cost(i, t, xi);
            ConstraintEval ke = problem.constraint(i, t, xi);
            RegularizerSpec rs = problem.reg_spec(i, t);
            rt.cost_sum += ce.value + regularizer_value(rs, xi);
            for (size_t k = 0; k < ke.value.size(); ++k) rt.g_sum[k] += ke.value[k];
            Subgradients& rv = revealed[si];
            rv.cost_grad = std::move(ce.grad);
            rv.g_jac = std::move(ke.jac);
            rv.g_val = std::move(ke.value);
            rv.reg = rs;
        }

        trace.rounds.push_back(std::move(rt));
    }
    return trace;
}

}  // namespace dopd
