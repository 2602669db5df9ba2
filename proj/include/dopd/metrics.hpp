#pragma once

// Performance metrics, comparator oracles, and the theoretical bound
// machinery: dynamic/static regret, cumulative coupled-constraint violation,
// accumulated comparator variation, uniform problem constants, and the
// closed-form sublinear bounds they induce.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dopd/algorithm.hpp"
#include "dopd/bregman.hpp"
#include "dopd/graph.hpp"
#include "dopd/linalg.hpp"
#include "dopd/problem.hpp"
#include "dopd/rng.hpp"

namespace dopd {

// xs[t-1][i]: the committed action of agent i in round t.
using Trajectory = std::vector<std::vector<Vec>>;

inline Trajectory actions(const Trace& trace) {
    Trajectory xs(trace.rounds.size());
    for (size_t t = 0; t < trace.rounds.size(); ++t) {
        xs[t].resize(trace.rounds[t].agents.size());
        for (size_t i = 0; i < xs[t].size(); ++i) xs[t][i] = trace.rounds[t].agents[i].x;
    }
    return xs;
}

struct ComparatorSequence {
    Trajectory points;  // points[t-1][i]
    std::string label;
};

// A comparator must stay inside the per-agent domains and satisfy the coupled
// constraint in every round it covers.
inline void check_comparator_feasibility(const OnlineProblem& problem, const Trajectory& ys,
                                         double tol = 1e-9) {
    const int n = problem.num_agents();
    for (size_t t0 = 0; t0 < ys.size(); ++t0) {
        const int t = static_cast<int>(t0) + 1;
        if (static_cast<int>(ys[t0].size()) != n)
            throw std::invalid_argument("comparator: wrong agent count at round " + std::to_string(t));
        Vec sum(static_cast<size_t>(problem.constraint_dim()), 0.0);
        for (int i = 0; i < n; ++i) {
            const Vec& y = ys[t0][static_cast<size_t>(i)];
            if (!problem.domain(i).contains(y, tol))
                throw std::invalid_argument("comparator: point outside the domain at round " +
                                            std::to_string(t) + ", agent " + std::to_string(i));
            ConstraintEval ce = problem.constraint(i, t, y);
            for (size_t k = 0; k < sum.size(); ++k) sum[k] += ce.value[k];
        }
        for (double v : sum)
            if (v > tol)
                throw std::invalid_argument("comparator: coupled constraint violated at round " +
                                            std::to_string(t) + " by " + std::to_string(v));
    }
}

// Full round objective sum_i (f_{i,t} + r_{i,t}) at per-agent points.
inline double round_objective(const OnlineProblem& problem, int t, const std::vector<Vec>& xs) {
    double s = 0.0;
    for (int i = 0; i < problem.num_agents(); ++i) {
        const Vec& x = xs[static_cast<size_t>(i)];
        s += problem.cost(i, t, x).value + regularizer_value(problem.reg_spec(i, t), x);
    }
    return s;
}

// Cumulative regret sum_t [ f_t(x_t) - f_t(y_t) ] against a comparator
// sequence covering the same rounds. The comparator is feasibility-checked.
inline double regret(const OnlineProblem& problem, const Trajectory& xs, const Trajectory& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("regret: trajectory/comparator length mismatch");
    check_comparator_feasibility(problem, ys);
    double s = 0.0;
    for (size_t t0 = 0; t0 < xs.size(); ++t0) {
        const int t = static_cast<int>(t0) + 1;
        s += round_objective(problem, t, xs[t0]) - round_objective(problem, t, ys[t0]);
    }
    return s;
}

// Prefix regrets at the given 1-based checkpoints (ascending).
inline Vec regret_curve(const OnlineProblem& problem, const Trajectory& xs, const Trajectory& ys,
                        const std::vector<int>& checkpoints) {
    if (xs.size() != ys.size()) throw std::invalid_argument("regret_curve: length mismatch");
    check_comparator_feasibility(problem, ys);
    Vec out;
    out.reserve(checkpoints.size());
    double s = 0.0;
    size_t next = 0;
    for (size_t t0 = 0; t0 < xs.size() && next < checkpoints.size(); ++t0) {
        const int t = static_cast<int>(t0) + 1;
        s += round_objective(problem, t, xs[t0]) - round_objective(problem, t, ys[t0]);
        while (next < checkpoints.size() && checkpoints[next] == t) {
            out.push_back(s);
            ++next;
        }
    }
    if (next != checkpoints.size()) throw std::invalid_argument("regret_curve: checkpoint beyond horizon");
    return out;
}

// || [ sum_t sum_i g_{i,t}(x_{i,t}) ]_+ ||, the compensated cumulative
// violation of the coupled constraint.
inline double constraint_violation(const OnlineProblem& problem, const Trajectory& xs) {
    Vec sum(static_cast<size_t>(problem.constraint_dim()), 0.0);
    for (size_t t0 = 0; t0 < xs.size(); ++t0) {
        const int t = static_cast<int>(t0) + 1;
        for (int i = 0; i < problem.num_agents(); ++i) {
            ConstraintEval ce = problem.constraint(i, t, xs[t0][static_cast<size_t>(i)]);
            for (size_t k = 0; k < sum.size(); ++k) sum[k] += ce.value[k];
        }
    }
    return norm2(nonneg_project(std::move(sum)));
}

inline Vec violation_curve(const OnlineProblem& problem, const Trajectory& xs,
                           const std::vector<int>& checkpoints) {
    Vec out;
    out.reserve(checkpoints.size());
    Vec sum(static_cast<size_t>(problem.constraint_dim()), 0.0);
    size_t next = 0;
    for (size_t t0 = 0; t0 < xs.size() && next < checkpoints.size(); ++t0) {
        const int t = static_cast<int>(t0) + 1;
        for (int i = 0; i < problem.num_agents(); ++i) {
            ConstraintEval ce = problem.constraint(i, t, xs[t0][static_cast<size_t>(i)]);
            for (size_t k = 0; k < sum.size(); ++k) sum[k] += ce.value[k];
        }
        while (next < checkpoints.size() && checkpoints[next] == t) {
            Vec pos = sum;
            out.push_back(norm2(nonneg_project(std::move(pos))));
            ++next;
        }
    }
    if (next != checkpoints.size()) throw std::invalid_argument("violation_curve: checkpoint beyond horizon");
    return out;
}

// Accumulated variation of a comparator against a dynamic mapping:
//   sum_{t=1}^{T-1} sum_i || y_{i,t+1} - Phi_{i,t+1}(y_{i,t}) ||.
inline double accumulated_variation(const Trajectory& ys, const DynamicMapping& mapping) {
    double s = 0.0;
    for (size_t t0 = 0; t0 + 1 < ys.size(); ++t0) {
        const int t_next = static_cast<int>(t0) + 2;
        for (size_t i = 0; i < ys[t0].size(); ++i) {
            Vec mapped = mapping.apply(static_cast<int>(i), t_next, ys[t0][i]);
            s += norm2(sub(ys[t0 + 1][i], mapped));
        }
    }
    return s;
}

// Identity-mapping variation with the stacked (whole-team) norm:
//   sum_{t=1}^{T-1} || y_{t+1} - y_t ||.
inline double accumulated_variation_identity(const Trajectory& ys) {
    double s = 0.0;
    for (size_t t0 = 0; t0 + 1 < ys.size(); ++t0) {
        double ss = 0.0;
        for (size_t i = 0; i < ys[t0].size(); ++i) {
            Vec d = sub(ys[t0 + 1][i], ys[t0][i]);
            ss += dot(d, d);
        }
        s += std::sqrt(ss);
    }
    return s;
}

// ------------------------------------------------------- comparator oracles

struct OptimumResult {
    std::vector<Vec> x;          // one point per agent
    double objective = 0.0;      // full round objective(s) at x
    double violation = 0.0;      // max coupled-constraint entry, positive part
    bool converged = false;
    double refinement_gap = 0.0; // |objective - refined objective|
    std::string note;
};

struct OracleOptions {
    long inner_iters = 20000;     // proximal-gradient cap per dual step
    long outer_iters = 4000;      // dual ascent steps
    double inner_tol = 1e-11;     // gradient-map residual target
    double outer_tol = 1e-9;      // projected dual-gradient residual target
    double mu_cap = 1e10;         // dual norm treated as divergence
    double refine_obj_tol = 1e-4; // run-vs-refinement agreement requirement
    double feas_tol = 1e-6;       // acceptable constraint violation at the output
};

namespace detail {

// Proximal gradient for  min_x smooth(x) + alpha_l1*||x||_1  over a domain,
// where `grad` returns the smooth gradient. Lipschitz constant estimated by
// sampled secants. Returns the minimizer.
inline Vec prox_gradient_min(const Domain& domain, const std::function<Vec(const Vec&)>& grad,
                             double l1_weight, Vec x, long max_iters, double tol, Rng& rng) {
    // Secant-based Lipschitz estimate with a doubling safety margin.
    double lip = 1e-12;
    for (int probe = 0; probe < 6; ++probe) {
        Vec u(x.size()), v(x.size());
        if (domain.kind == Domain::Kind::Box) {
            for (size_t j = 0; j < x.size(); ++j) {
                u[j] = rng.uniform(domain.lo[j], domain.hi[j]);
                v[j] = rng.uniform(domain.lo[j], domain.hi[j]);
            }
        } else {
            u = rng.simplex_point(domain.dim);
            v = rng.simplex_point(domain.dim);
        }
        double dn = norm2(sub(u, v));
        if (dn < 1e-12) continue;
        lip = std::max(lip, norm2(sub(grad(u), grad(v))) / dn);
    }
    lip = 2.0 * lip + 1e-9;
    const double step = 1.0 / lip;
    for (long it = 0; it < max_iters; ++it) {
        Vec g = grad(x);
        Vec xn(x.size());
        if (domain.kind == Domain::Kind::Box) {
            for (size_t j = 0; j < x.size(); ++j) {
                double v = x[j] - step * g[j];
                if (l1_weight > 0.0) {
                    if (v > step * l1_weight)
                        v -= step * l1_weight;
                    else if (v < -step * l1_weight)
                        v += step * l1_weight;
                    else
                        v = 0.0;
                }
                if (v < domain.lo[j]) v = domain.lo[j];
                if (v > domain.hi[j]) v = domain.hi[j];
                xn[j] = v;
            }
        } else {
            // ||x||_1 is constant on the simplex.
            Vec y(x.size());
            for (size_t j = 0; j < x.size(); ++j) y[j] = x[j] - step * g[j];
            xn = project_simplex(y);
        }
        double res = norm2(sub(xn, x)) / step;
        x = std::move(xn);
        if (res <= tol) break;
    }
    return x;
}

}  // namespace detail

// Projected primal-dual oracle for the offline benchmark
//   min_{x in X}  sum_{t in rounds} f_t(x) + r_t(x)
//   s.t.          sum_i g_{i,t}(x_i) <= 0  for every t in rounds,
// realized as dual ascent with exact (proximal-gradient) primal minimization
// per dual iterate and a backtracking dual step. With a single round this is
// the per-round benchmark; with all rounds it is the best fixed action.
inline OptimumResult saddle_solve(const OnlineProblem& problem, const std::vector<int>& rounds,
                                  const OracleOptions& opts = {}) {
    const int n = problem.num_agents();
    const int m = problem.constraint_dim();
    const size_t mr = static_cast<size_t>(m) * rounds.size();
    Rng rng(0xacc01adeULL);

    auto primal_min = [&](const Vec& mu, double tol, std::vector<Vec> warm) {
        std::vector<Vec> xs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const Domain& dom = problem.domain(i);
            // Smooth part: costs, the l2 term of every round's regularizer,
            // and the dual-weighted constraints. The l1 terms go to the prox.
            double l1w = 0.0;
            for (size_t rt = 0; rt < rounds.size(); ++rt) l1w += problem.reg_spec(i, rounds[rt]).l1;
            auto grad = [&, i](const Vec& x) {
                Vec g(x.size(), 0.0);
                for (size_t rt = 0; rt < rounds.size(); ++rt) {
                    const int t = rounds[rt];
                    CostEval ce = problem.cost(i, t, x);
                    for (size_t j = 0; j < g.size(); ++j) g[j] += ce.grad[j];
                    const double l2 = problem.reg_spec(i, t).l2;
                    if (l2 > 0.0)
                        for (size_t j = 0; j < g.size(); ++j) g[j] += 2.0 * l2 * x[j];
                    ConstraintEval ke = problem.constraint(i, t, x);
                    for (int row = 0; row < m; ++row) {
                        const double mu_rt = mu[rt * static_cast<size_t>(m) + row];
                        if (mu_rt == 0.0) continue;
                        for (size_t j = 0; j < g.size(); ++j) g[j] += mu_rt * ke.jac(row, static_cast<int>(j));
                    }
                }
                return g;
            };
            Vec start = warm.empty() ? dom.midpoint() : std::move(warm[si]);
            xs[si] = detail::prox_gradient_min(dom, grad, l1w, std::move(start), opts.inner_iters, tol, rng);
        }
        return xs;
    };

    auto lagrangian_parts = [&](const std::vector<Vec>& xs) {
        double obj = 0.0;
        Vec gsum(mr, 0.0);
        for (size_t rt = 0; rt < rounds.size(); ++rt) {
            const int t = rounds[rt];
            obj += round_objective(problem, t, xs);
            for (int i = 0; i < n; ++i) {
                ConstraintEval ke = problem.constraint(i, t, xs[static_cast<size_t>(i)]);
                for (int row = 0; row < m; ++row) gsum[rt * static_cast<size_t>(m) + row] += ke.value[row];
            }
        }
        return std::make_pair(obj, std::move(gsum));
    };

    auto solve = [&](double inner_tol, long outer_iters) {
        Vec mu(mr, 0.0);
        std::vector<Vec> xs = primal_min(mu, inner_tol, {});
        auto [obj, gsum] = lagrangian_parts(xs);
        double dual_val = obj + dot(mu, gsum);
        double step = 1.0;
        OptimumResult res;
        for (long it = 0; it < outer_iters; ++it) {
            // Projected dual-gradient residual as the stopping certificate.
            double resid = 0.0;
            for (size_t k = 0; k < mr; ++k) {
                double up = std::max(mu[k] + gsum[k], 0.0) - mu[k];
                resid += up * up;
            }
            resid = std::sqrt(resid);
            if (resid <= opts.outer_tol) break;
            bool advanced = false;
            while (step > 1e-14) {
                Vec mu_try(mr);
                for (size_t k = 0; k < mr; ++k) mu_try[k] = std::max(mu[k] + step * gsum[k], 0.0);
                std::vector<Vec> xs_try = primal_min(mu_try, inner_tol, xs);
                auto [obj_try, gsum_try] = lagrangian_parts(xs_try);
                double dual_try = obj_try + dot(mu_try, gsum_try);
                if (dual_try >= dual_val - 1e-12) {
                    mu = std::move(mu_try);
                    xs = std::move(xs_try);
                    obj = obj_try;
                    gsum = std::move(gsum_try);
                    dual_val = dual_try;
                    step *= 1.3;
                    advanced = true;
                    break;
                }
                step *= 0.5;
            }
            if (!advanced) break;
            if (norm2(mu) > opts.mu_cap) {
                res.note = "dual iterate diverged";
                break;
            }
        }
        res.x = std::move(xs);
        res.objective = obj;
        double viol = 0.0;
        for (double v : gsum) viol = std::max(viol, v);
        res.violation = std::max(viol, 0.0);
        return res;
    };

    OptimumResult first = solve(opts.inner_tol, opts.outer_iters);
    OptimumResult refined = solve(opts.inner_tol * 0.1, opts.outer_iters * 2);
    refined.refinement_gap = std::fabs(first.objective - refined.objective);
    refined.converged = refined.refinement_gap <= opts.refine_obj_tol && refined.violation <= opts.feas_tol &&
                        refined.note.empty();
    if (!refined.converged && refined.note.empty())
        refined.note = "oracle did not converge (gap " + std::to_string(refined.refinement_gap) +
                       ", violation " + std::to_string(refined.violation) + ")";
    return refined;
}

// First-order optimality audit of a candidate per-round optimum: feasibility
// of the coupled constraint plus per-agent stationarity of f + r over the
// domain, honouring the l1 subdifferential interval.
inline bool audit_round_optimum(const OnlineProblem& problem, int t, const std::vector<Vec>& xs,
                                double tol = 1e-6) {
    const int n = problem.num_agents();
    Vec gsum(static_cast<size_t>(problem.constraint_dim()), 0.0);
    for (int i = 0; i < n; ++i) {
        const size_t si = static_cast<size_t>(i);
        const Domain& dom = problem.domain(i);
        if (!dom.contains(xs[si], 1e-9)) return false;
        CostEval ce = problem.cost(i, t, xs[si]);
        RegularizerSpec rs = problem.reg_spec(i, t);
        ConstraintEval ke = problem.constraint(i, t, xs[si]);
        for (size_t k = 0; k < gsum.size(); ++k) gsum[k] += ke.value[k];
        if (dom.kind != Domain::Kind::Box) return false;  // audit only covers boxes
        for (int j = 0; j < dom.dim; ++j) {
            const size_t jj = static_cast<size_t>(j);
            const double xv = xs[si][jj];
            double smooth = ce.grad[jj] + 2.0 * rs.l2 * xv;
            // Subdifferential interval of the l1 part at xv.
            double v_lo, v_hi;
            if (xv > 0.0)
                v_lo = v_hi = smooth + rs.l1;
            else if (xv < 0.0)
                v_lo = v_hi = smooth - rs.l1;
            else {
                v_lo = smooth - rs.l1;
                v_hi = smooth + rs.l1;
            }
            const bool at_lo = xv <= dom.lo[jj] + 1e-9;
            const bool at_hi = xv >= dom.hi[jj] - 1e-9;
            bool ok;
            if (at_lo && at_hi)
                ok = true;  // degenerate box
            else if (at_lo)
                ok = v_hi >= -tol;
            else if (at_hi)
                ok = v_lo <= tol;
            else
                ok = v_lo <= tol && v_hi >= -tol;
            if (!ok) return false;
        }
    }
    for (double v : gsum)
        if (v > 1e-9) return false;
    return true;
}

// Per-round benchmark x_t^* = argmin of the round objective subject to the
// coupled constraint. Families that know their optimum provide it as a hint,
// which is audited before being trusted; otherwise the saddle oracle runs.
inline OptimumResult dynamic_optimum(const OnlineProblem& problem, int t, const OracleOptions& opts = {}) {
    if (auto hint = problem.reference_optimum(t)) {
        if (audit_round_optimum(problem, t, *hint)) {
            OptimumResult res;
            res.x = std::move(*hint);
            res.objective = round_objective(problem, t, res.x);
            Vec gsum(static_cast<size_t>(problem.constraint_dim()), 0.0);
            for (int i = 0; i < problem.num_agents(); ++i) {
                ConstraintEval ke = problem.constraint(i, t, res.x[static_cast<size_t>(i)]);
                for (size_t k = 0; k < gsum.size(); ++k) gsum[k] += ke.value[k];
            }
            double viol = 0.0;
            for (double v : gsum) viol = std::max(viol, v);
            res.violation = std::max(viol, 0.0);
            res.converged = true;
            res.note = "audited reference optimum";
            return res;
        }
    }
    return saddle_solve(problem, {t}, opts);
}

// The full dynamic comparator sequence {x_t^*}.
inline ComparatorSequence dynamic_comparator(const OnlineProblem& problem, const OracleOptions& opts = {}) {
    ComparatorSequence seq;
    seq.label = "dynamic";
    seq.points.resize(static_cast<size_t>(problem.horizon()));
    for (int t = 1; t <= problem.horizon(); ++t) {
        OptimumResult res = dynamic_optimum(problem, t, opts);
        if (!res.converged)
            throw std::runtime_error("dynamic_comparator: oracle failed at round " + std::to_string(t) + ": " +
                                     res.note);
        seq.points[static_cast<size_t>(t - 1)] = std::move(res.x);
    }
    return seq;
}

struct StaticOptimum {
    bool feasible = false;
    double infeasibility_gap = 0.0;  // smallest achievable max constraint entry (if infeasible)
    OptimumResult result;
};

// Best fixed action: minimize the horizon objective subject to the coupled
// constraint in every round. A smooth feasibility program (minimizing the
// summed squared positive parts) screens for an empty feasible set first.
inline StaticOptimum static_optimum(const OnlineProblem& problem, const OracleOptions& opts = {}) {
    const int n = problem.num_agents();
    const int m = problem.constraint_dim();
    const int T = problem.horizon();
    StaticOptimum out;
    Rng rng(0xfea51b1eULL);

    // Feasibility screen: min_x sum_t || [sum_i g_{i,t}(x_i)]_+ ||^2 / 2.
    std::vector<Vec> xs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<size_t>(i)] = problem.domain(i).midpoint();
    {
        auto gsum_all = [&](const std::vector<Vec>& pts) {
            std::vector<Vec> sums(static_cast<size_t>(T), Vec(static_cast<size_t>(m), 0.0));
            for (int t = 1; t <= T; ++t)
                for (int i = 0; i < n; ++i) {
                    ConstraintEval ke = problem.constraint(i, t, pts[static_cast<size_t>(i)]);
                    for (int row = 0; row < m; ++row)
                        sums[static_cast<size_t>(t - 1)][static_cast<size_t>(row)] += ke.value[row];
                }
            return sums;
        };
        // Gradient Lipschitz bound via summed squared Jacobian norms.
        double lip = 1e-9;
        for (int t = 1; t <= T; ++t)
            for (int i = 0; i < n; ++i) {
                ConstraintEval ke = problem.constraint(i, t, xs[static_cast<size_t>(i)]);
                double f = frobenius_norm(ke.jac);
                lip += f * f;
            }
        const double step = 1.0 / (2.0 * lip);
        const long iters = 4000;
        double prev_value = std::numeric_limits<double>::infinity();
        int stalled = 0;
        for (long it = 0; it < iters; ++it) {
            std::vector<Vec> sums = gsum_all(xs);
            double value = 0.0;
            for (const Vec& sv : sums)
                for (double v : sv) value += std::max(v, 0.0) * std::max(v, 0.0);
            if (value <= 1e-20) break;
            if (value >= prev_value * (1.0 - 1e-10)) {
                if (++stalled > 50) break;
            } else {
                stalled = 0;
            }
            prev_value = value;
            std::vector<Vec> grads(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i)
                grads[static_cast<size_t>(i)].assign(static_cast<size_t>(problem.dim(i)), 0.0);
            for (int t = 1; t <= T; ++t) {
                const Vec& sv = sums[static_cast<size_t>(t - 1)];
                for (int i = 0; i < n; ++i) {
                    ConstraintEval ke = problem.constraint(i, t, xs[static_cast<size_t>(i)]);
                    Vec& g = grads[static_cast<size_t>(i)];
                    for (int row = 0; row < m; ++row) {
                        const double pos = std::max(sv[static_cast<size_t>(row)], 0.0);
                        if (pos == 0.0) continue;
                        for (size_t j = 0; j < g.size(); ++j) g[j] += pos * ke.jac(row, static_cast<int>(j));
                    }
                }
            }
            double moved = 0.0;
            for (int i = 0; i < n; ++i) {
                const size_t si = static_cast<size_t>(i);
                Vec xn(xs[si].size());
                for (size_t j = 0; j < xn.size(); ++j) xn[j] = xs[si][j] - step * grads[si][j];
                xn = project_domain(problem.domain(i), std::move(xn));
                moved += norm2(sub(xn, xs[si]));
                xs[si] = std::move(xn);
            }
            if (moved <= 1e-13) break;
        }
        std::vector<Vec> sums = gsum_all(xs);
        double worst = 0.0;
        for (const Vec& sv : sums)
            for (double v : sv) worst = std::max(worst, v);
        out.infeasibility_gap = worst;
        if (worst > 1e-7) {
            out.feasible = false;
            out.result.note = "no feasible fixed action (best max violation " + std::to_string(worst) + ")";
            return out;
        }
    }

    std::vector<int> rounds(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t) rounds[static_cast<size_t>(t - 1)] = t;
    out.result = saddle_solve(problem, rounds, opts);
    out.feasible = out.result.converged;
    if (!out.result.converged && out.result.note.find("diverged") != std::string::npos) {
        out.feasible = false;
        out.result.note += " (treated as infeasible)";
    }
    return out;
}

// The static comparator repeats the fixed optimum across all rounds.
inline ComparatorSequence static_comparator(const OnlineProblem& problem, const StaticOptimum& opt) {
    if (!opt.feasible) throw std::invalid_argument("static_comparator: no feasible fixed action");
    ComparatorSequence seq;
    seq.label = "static";
    seq.points.assign(static_cast<size_t>(problem.horizon()), opt.result.x);
    return seq;
}

// ------------------------------------------------------- Slater estimation

struct SlaterEstimate {
    double margin = 0.0;   // min over rounds of the witness's slack
    std::vector<Vec> witness;
};

// Searches sampled products of the domains for a point with positive uniform
// slack: margin(x) = min_t ( -max_j [sum_i g_{i,t}(x_i)]_j ). The returned
// margin is attained by the witness, so it is a valid lower bound on the best
// achievable slack whenever it is positive.
inline std::optional<SlaterEstimate> estimate_slater(const OnlineProblem& problem, int samples,
                                                     uint64_t seed) {
    const int n = problem.num_agents();
    const int m = problem.constraint_dim();
    const int T = problem.horizon();
    Rng rng(seed);

    // Margin of a candidate witness: min over rounds and components of -sum g.
    // Also reports the argmax round/component for the subgradient polish.
    struct Worst {
        double margin;
        int t, j;
    };
    auto eval = [&](const std::vector<Vec>& xs) {
        Worst w{std::numeric_limits<double>::infinity(), 1, 0};
        for (int t = 1; t <= T; ++t) {
            Vec sum(static_cast<size_t>(m), 0.0);
            for (int i = 0; i < n; ++i) {
                ConstraintEval ke = problem.constraint(i, t, xs[static_cast<size_t>(i)]);
                for (size_t k = 0; k < sum.size(); ++k) sum[k] += ke.value[k];
            }
            for (int j = 0; j < m; ++j) {
                if (-sum[static_cast<size_t>(j)] < w.margin) {
                    w.margin = -sum[static_cast<size_t>(j)];
                    w.t = t;
                    w.j = j;
                }
            }
        }
        return w;
    };

    std::vector<Vec> best_xs;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        std::vector<Vec> xs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const Domain& d = problem.domain(i);
            Vec x(static_cast<size_t>(d.dim));
            if (d.kind == Domain::Kind::Box) {
                for (int j = 0; j < d.dim; ++j)
                    x[static_cast<size_t>(j)] = rng.uniform(d.lo[static_cast<size_t>(j)],
                                                            d.hi[static_cast<size_t>(j)]);
            } else {
                x = rng.simplex_point(d.dim);
            }
            xs[static_cast<size_t>(i)] = std::move(x);
        }
        Worst w = eval(xs);
        if (w.margin > best_margin) {
            best_margin = w.margin;
            best_xs = std::move(xs);
        }
    }

    // Polish the best sample with projected subgradient descent on the worst
    // constraint component. The returned margin is always re-evaluated at the
    // witness, so it remains a genuine certificate.
    if (!best_xs.empty()) {
        double diam = 0.0;
        for (int i = 0; i < n; ++i) diam = std::max(diam, problem.domain(i).diameter());
        std::vector<Vec> cur = best_xs;
        for (int it = 0; it < 200; ++it) {
            Worst w = eval(cur);
            if (w.margin > best_margin) {
                best_margin = w.margin;
                best_xs = cur;
            }
            const double step = 0.1 * diam / std::sqrt(static_cast<double>(it + 1));
            for (int i = 0; i < n; ++i) {
                ConstraintEval ke = problem.constraint(i, w.t, cur[static_cast<size_t>(i)]);
                Vec& x = cur[static_cast<size_t>(i)];
                for (size_t k = 0; k < x.size(); ++k)
                    x[k] -= step * ke.jac(w.j, static_cast<int>(k));
                x = project_domain(problem.domain(i), x);
            }
        }
        Worst w = eval(cur);
        if (w.margin > best_margin) {
            best_margin = w.margin;
            best_xs = cur;
        }
    }

    if (best_margin > 0.0) return SlaterEstimate{best_margin, std::move(best_xs)};
    return std::nullopt;
}

// ------------------------------------------------------------ the constants

struct TheoreticalConstants {
    // Uniform problem bounds and geometry data.
    double F = 0.0;         // |f|, |r|, ||g|| bound
    double G = 0.0;         // subgradient norm bound
    double K = 0.0;         // divergence Lipschitz constant (2*sigma*diam)
    double diam = 0.0;      // diameter of the product domain
    double sigma_lb = 0.0;  // smallest strong-convexity modulus
    double mu_lb = 0.0;     // relative strong convexity of the costs (0 if unused)
    int n = 0;
    double w = 0.0;         // mixing weight floor
    int iota = 1;           // connectivity window
    int m = 0;
    double tau = 0.0;       // (1 - w/(2n^2))^{-2}
    double lambda = 0.0;    // (1 - w/(2n^2))^{1/iota}
    double B1 = 0.0;        // 2F + G*diam
    double C11 = 0.0;       // 3 n^2 tau B1 F / (1-lambda) + n B1^2 / 2
    double C12 = 0.0;       // 4 n G^2 / sigma_lb

    // Schedule-dependent aggregates (complete_constants fills these).
    double c = 0.0;
    double kappa = 0.0;
    double C1 = 0.0;
    double C21 = 0.0;
    double C2 = 0.0;
    double eps = 0.0;  // Slater margin supplied/estimated (0 = unavailable)
    double B3 = 0.0;
    double B2 = 0.0;
    double C3 = 0.0;
    double B4 = 0.0;
    double C4 = 0.0;
};

// Analytic uniform bounds for the tracking family: per-cell interval maxima
// over the box, maximized across agents and rounds. Deliberately conservative
// (interval sums), which only loosens the theoretical bounds.
inline TheoreticalConstants estimate_constants(const TrackingProblem& problem, const GeometryConfig& geometry,
                                               const CommGraphSequence& graphs) {
    const TrackingInstance& inst = problem.instance();
    const TrackingParams& pr = inst.params;
    if (geometry.kind != BregmanGeometry::Kind::ScaledEuclidean)
        throw std::invalid_argument("estimate_constants: the tracking family runs on box domains");
    TheoreticalConstants tc;
    tc.n = pr.n;
    tc.m = pr.m;
    tc.w = graphs.weight_floor;
    tc.iota = graphs.window;

    const double lo = pr.box_lo, hi = pr.box_hi;
    const double coord_abs = std::max(std::fabs(lo), std::fabs(hi));
    double f_bound = 0.0, r_bound = 0.0, g_bound = 0.0;
    double fg_bound = 0.0, rg_bound = 0.0, gg_bound = 0.0;
    const int p = pr.p;
    // ||x||-type maxima over the box.
    double max_norm_sq = static_cast<double>(p) * coord_abs * coord_abs;
    const double max_norm = std::sqrt(max_norm_sq);
    r_bound = pr.lambda1 * (std::sqrt(static_cast<double>(p)) * max_norm) +
              pr.lambda2 * max_norm_sq;  // |r| <= l1*||x||_1 + l2*||x||^2, ||x||_1 <= sqrt(p)||x||
    rg_bound = pr.lambda1 * std::sqrt(static_cast<double>(p)) + 2.0 * pr.lambda2 * max_norm;

    for (int t = 1; t <= pr.horizon; ++t) {
        for (int i = 0; i < pr.n; ++i) {
            const size_t k = inst.at(t, i);
            const Vec& piv = inst.pi[k];
            const Vec& yv = inst.y[k];
            double lin_hi = 0.0, lin_lo = 0.0, quad_hi = 0.0, dev_sq = 0.0;
            for (int j = 0; j < p; ++j) {
                const size_t jj = static_cast<size_t>(j);
                const double a = pr.zeta1 * piv[jj];
                lin_hi += std::max(a * lo, a * hi);
                lin_lo += std::min(a * lo, a * hi);
                const double dmax = std::max(std::fabs(lo - yv[jj]), std::fabs(hi - yv[jj]));
                quad_hi += dmax * dmax;
                dev_sq += dmax * dmax;
            }
            f_bound = std::max(f_bound, std::max(std::fabs(lin_hi + pr.zeta2 * quad_hi), std::fabs(lin_lo)));
            double pi_norm = norm2(piv);
            fg_bound = std::max(fg_bound, pr.zeta1 * pi_norm + 2.0 * pr.zeta2 * std::sqrt(dev_sq));
            const Mat& dm = inst.D[k];
            const Vec& dv = inst.d[k];
            double rows_sq = 0.0;
            for (int row = 0; row < pr.m; ++row) {
                double row_hi = -dv[static_cast<size_t>(row)], row_lo = -dv[static_cast<size_t>(row)];
                for (int j = 0; j < p; ++j) {
                    const double a = dm(row, j);
                    row_hi += std::max(a * lo, a * hi);
                    row_lo += std::min(a * lo, a * hi);
                }
                const double row_abs = std::max(std::fabs(row_hi), std::fabs(row_lo));
                rows_sq += row_abs * row_abs;
            }
            g_bound = std::max(g_bound, std::sqrt(rows_sq));
            gg_bound = std::max(gg_bound, frobenius_norm(dm));
        }
    }

    if (problem.placement() == RegPlacement::Explicit) {
        tc.F = std::max({f_bound, r_bound, g_bound});
        tc.G = std::max({fg_bound, rg_bound, gg_bound});
        tc.mu_lb = pr.zeta2 / geometry.sigma;
    } else {
        tc.F = std::max(f_bound + r_bound, g_bound);
        tc.G = std::max(fg_bound + rg_bound, gg_bound);
        tc.mu_lb = (pr.zeta2 + pr.lambda2) / geometry.sigma;
    }

    const double agent_diam_sq = static_cast<double>(p) * (hi - lo) * (hi - lo);
    tc.diam = std::sqrt(static_cast<double>(pr.n) * agent_diam_sq);
    tc.K = 2.0 * geometry.sigma * tc.diam;
    tc.sigma_lb = 2.0 * geometry.sigma;

    const double base = 1.0 - tc.w / (2.0 * static_cast<double>(tc.n) * tc.n);
    tc.tau = 1.0 / (base * base);
    tc.lambda = std::pow(base, 1.0 / tc.iota);
    tc.B1 = 2.0 * tc.F + tc.G * tc.diam;
    tc.C11 = 3.0 * tc.n * tc.n * tc.tau * tc.B1 * tc.F / (1.0 - tc.lambda) + tc.n * tc.B1 * tc.B1 / 2.0;
    tc.C12 = 4.0 * tc.n * tc.G * tc.G / tc.sigma_lb;
    return tc;
}

// Fills the schedule-dependent aggregates. `eps` supplies a Slater margin for
// the strictly-feasible chain (0 leaves that chain unset).
inline TheoreticalConstants complete_constants(TheoreticalConstants tc, const StepsizeSchedule& schedule,
                                               double eps = 0.0) {
    tc.c = schedule.c;
    tc.kappa = schedule.kappa;
    const double c = tc.c, kappa = tc.kappa;
    tc.C1 = tc.C11 / kappa + tc.C12 / (1.0 - c) + 2.0 * tc.n * tc.diam * tc.K;
    tc.C21 = 2.0 * tc.n * (2.0 * tc.G * tc.G / ((1.0 - c) * tc.sigma_lb) + 1.0 / (1.0 - kappa) + 2.0);
    tc.C2 = tc.C21 * (2.0 * tc.n * tc.F + tc.C1);
    tc.B3 = 2.0 * tc.F + tc.C11;
    tc.eps = eps;
    if (eps > 0.0) {
        tc.B2 = std::max(2.0 * eps + 2.0 * std::sqrt(eps * eps + tc.n * tc.diam * tc.K), 2.0 * tc.B3 / eps);
        tc.C3 = tc.n * (2.0 * tc.B2 + tc.B2 / (1.0 - kappa) +
                        tc.G * tc.G * (tc.B2 + 2.0) * std::sqrt(static_cast<double>(tc.m)) /
                            (tc.sigma_lb * kappa));
    }
    if (tc.mu_lb > 0.0) {
        tc.B4 = std::ceil(std::pow(1.0 / tc.mu_lb, 1.0 / kappa));
        tc.C4 = tc.n * tc.B1 * tc.B1 / (2.0 * kappa) + tc.B1 * tc.C11 / kappa + tc.C12 / kappa +
                2.0 * tc.n * tc.diam * tc.K * std::pow(tc.B4, 1.0 - kappa);
    }
    return tc;
}

struct BoundPair {
    double regret_bound = 0.0;
    double violation_bound = 0.0;
};

// Closed-form bound values at horizon T for a comparator with accumulated
// variation V (schedule-matched: the general pair, the strictly-feasible pair
// when eps > 0, or the strongly-convex static pair).
inline BoundPair theoretical_bounds(const TheoreticalConstants& tc, StepsizeSchedule::Kind kind, int T,
                                    double variation) {
    const double Td = static_cast<double>(T);
    const double c = tc.c, kappa = tc.kappa;
    BoundPair b;
    switch (kind) {
        case StepsizeSchedule::Kind::General:
        case StepsizeSchedule::Kind::Custom:
            b.regret_bound = tc.C1 * std::pow(Td, std::max({1.0 - c, c, kappa})) +
                             2.0 * tc.K * std::pow(Td, c) * variation;
            b.violation_bound = std::sqrt(tc.C2 * std::pow(Td, std::max(2.0 - c, 2.0 - kappa)) +
                                          tc.K * tc.C21 * std::pow(Td, std::max(1.0, 1.0 + c - kappa)) *
                                              variation);
            break;
        case StepsizeSchedule::Kind::Slater:
            if (!(tc.eps > 0.0))
                throw std::invalid_argument("theoretical_bounds: Slater bounds need a positive margin");
            b.regret_bound = tc.C1 * std::pow(Td, std::max(1.0 - kappa, kappa)) +
                             2.0 * tc.K * std::pow(Td, 1.0 - kappa) * variation;
            b.violation_bound = tc.C3 * std::pow(Td, std::max(1.0 - kappa, kappa));
            break;
        case StepsizeSchedule::Kind::StronglyConvex:
            if (!(tc.mu_lb > 0.0))
                throw std::invalid_argument("theoretical_bounds: strongly-convex bounds need mu > 0");
            b.regret_bound = std::max(tc.C1, tc.C4) * std::pow(Td, kappa);
            b.violation_bound = std::sqrt(tc.C2 * std::pow(Td, std::max(2.0 - c, 2.0 - kappa)) +
                                          tc.K * tc.C21 * std::pow(Td, std::max(1.0, 1.0 + c - kappa)) *
                                              variation);
            break;
    }
    return b;
}

// Least-squares slope of log(value) against log(t); nonpositive values and
// their checkpoints are skipped (they carry no growth information).
inline double loglog_slope(const std::vector<int>& ts, const Vec& vals) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (size_t k = 0; k < ts.size() && k < vals.size(); ++k) {
        if (!(vals[k] > 0.0)) continue;
        const double x = std::log(static_cast<double>(ts[k]));
        const double y = std::log(vals[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) throw std::invalid_argument("loglog_slope: need at least two positive samples");
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("loglog_slope: degenerate abscissae");
    return (count * sxy - sx * sy) / denom;
}

}  // namespace dopd
