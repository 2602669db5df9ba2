#pragma once

// Online problem interface and the multi-target tracking family.
//
// Tracking round t, agent i over the box X_i:
//   cost        f_{i,t}(x) = zeta1*<pi_{i,t}, x> + zeta2*||x - y_{i,t}||^2
//   regularizer r_{i,t}(x) = lambda1*||x||_1 + lambda2*||x||^2
//   constraint  g_{i,t}(x) = D_{i,t} x - d_{i,t}   (coupled across agents by
//                                                   sum_i g_{i,t}(x_i) <= 0)
// Targets move as x0_{i,t+1} = A_{i,t} x0_{i,t} with A_{i,t} doubly stochastic
// (a random convex combination of three permutation matrices), d is chosen as
// D x0 so the moving target is always exactly feasible, and y is placed so the
// per-round optimum of cost+regularizer sits at the target itself.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dopd/bregman.hpp"
#include "dopd/linalg.hpp"
#include "dopd/rng.hpp"

namespace dopd {

struct CostEval {
    double value = 0.0;
    Vec grad;
};

struct ConstraintEval {
    Vec value;
    Mat jac;
};

// Immutable stream of per-round data revealed to the agents after they act.
// dim(i) may differ per agent; the constraint dimension m is shared.
class OnlineProblem {
  public:
    virtual ~OnlineProblem() = default;

    virtual int num_agents() const = 0;
    virtual int constraint_dim() const = 0;
    virtual int horizon() const = 0;
    virtual int dim(int agent) const = 0;
    virtual const Domain& domain(int agent) const = 0;

    virtual CostEval cost(int agent, int t, const Vec& x) const = 0;
    virtual RegularizerSpec reg_spec(int agent, int t) const = 0;
    virtual ConstraintEval constraint(int agent, int t, const Vec& x) const = 0;

    // Known per-round optimum of the full round objective, if the family has
    // one (used as a hint that metrics audit before trusting).
    virtual std::optional<std::vector<Vec>> reference_optimum(int /*t*/) const { return std::nullopt; }
};

// ------------------------------------------------------------ tracking data

struct TrackingParams {
    int n = 10;        // agents
    int m = 3;         // coupled constraint dimension
    int p = 4;         // per-agent decision dimension
    int horizon = 2000;
    double zeta1 = 1.0;
    double zeta2 = 30.0;
    double lambda1 = 1.0;
    double lambda2 = 30.0;
    double box_lo = 0.0;
    double box_hi = 5.0;
    uint64_t seed = 1;
};

struct TrackingInstance {
    TrackingParams params;
    // Per (t, i), t = 1..horizon, flattened as (t-1)*n + i.
    std::vector<Vec> pi;   // p
    std::vector<Mat> D;    // m x p
    std::vector<Vec> d;    // m, equals D * x0 of the same round
    std::vector<Vec> x0;   // p, moving target, stays inside the box
    std::vector<Vec> y;    // p, cost anchor placing the round optimum at x0
    std::vector<Mat> A;    // p x p, target dynamics, t = 1..horizon-1 only

    size_t at(int t, int i) const { return static_cast<size_t>(t - 1) * params.n + i; }
    size_t dyn_at(int t, int i) const { return static_cast<size_t>(t - 1) * params.n + i; }

    bool operator==(const TrackingInstance& o) const {
        auto eq_vecs = [](const std::vector<Vec>& a, const std::vector<Vec>& b) {
            if (a.size() != b.size()) return false;
            for (size_t k = 0; k < a.size(); ++k)
                if (a[k] != b[k]) return false;
            return true;
        };
        auto eq_mats = [](const std::vector<Mat>& a, const std::vector<Mat>& b) {
            if (a.size() != b.size()) return false;
            for (size_t k = 0; k < a.size(); ++k)
                if (a[k].rows != b[k].rows || a[k].cols != b[k].cols || a[k].data != b[k].data) return false;
            return true;
        };
        return params.n == o.params.n && params.m == o.params.m && params.p == o.params.p &&
               params.horizon == o.params.horizon && params.zeta1 == o.params.zeta1 &&
               params.zeta2 == o.params.zeta2 && params.lambda1 == o.params.lambda1 &&
               params.lambda2 == o.params.lambda2 && params.box_lo == o.params.box_lo &&
               params.box_hi == o.params.box_hi && params.seed == o.params.seed && eq_vecs(pi, o.pi) &&
               eq_mats(D, o.D) && eq_vecs(d, o.d) && eq_vecs(x0, o.x0) && eq_vecs(y, o.y) && eq_mats(A, o.A);
    }
};

namespace detail {

// Convex combination of three uniformly random permutation matrices; row and
// column sums are 1 up to rounding, which the caller guards with a box clamp.
inline Mat random_doubly_stochastic(int p, Rng& rng) {
    Mat a(p, p, 0.0);
    std::vector<int> perms[3];
    for (auto& pm : perms) pm = rng.permutation(p);
    Vec w = rng.simplex_point(3);
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < p; ++r) a(r, perms[k][static_cast<size_t>(r)]) += w[static_cast<size_t>(k)];
    return a;
}

inline void check_round(const TrackingInstance& inst, int t) {
    if (t < 1 || t > inst.params.horizon)
        throw std::invalid_argument("tracking: round " + std::to_string(t) + " out of range 1.." +
                                    std::to_string(inst.params.horizon));
}

inline void check_agent(const TrackingInstance& inst, int i) {
    if (i < 0 || i >= inst.params.n)
        throw std::invalid_argument("tracking: agent " + std::to_string(i) + " out of range");
}

}  // namespace detail

// Deterministic instance generation; a fixed draw order makes equal seeds
// produce bit-identical instances. Coefficients: pi integer-uniform {0..10},
// D integer-uniform {-5..5}, first targets uniform in the box.
inline TrackingInstance generate_tracking_instance(const TrackingParams& params) {
    if (params.n < 1 || params.m < 1 || params.p < 1 || params.horizon < 1)
        throw std::invalid_argument("generate_tracking_instance: sizes must be positive");
    if (!(params.box_lo < params.box_hi))
        throw std::invalid_argument("generate_tracking_instance: empty box");
    if (!(params.zeta2 > 0.0))
        throw std::invalid_argument("generate_tracking_instance: zeta2 must be positive");
    TrackingInstance inst;
    inst.params = params;
    const int n = params.n, m = params.m, p = params.p, T = params.horizon;
    const size_t cells = static_cast<size_t>(T) * n;
    inst.pi.resize(cells);
    inst.D.resize(cells);
    inst.d.resize(cells);
    inst.x0.resize(cells);
    inst.y.resize(cells);
    if (T > 1) inst.A.resize(static_cast<size_t>(T - 1) * n);

    Rng rng(params.seed);
    Vec lo(static_cast<size_t>(p), params.box_lo), hi(static_cast<size_t>(p), params.box_hi);
    for (int i = 0; i < n; ++i) {
        Vec x(static_cast<size_t>(p));
        for (auto& v : x) v = rng.uniform(params.box_lo, params.box_hi);
        inst.x0[inst.at(1, i)] = std::move(x);
    }
    for (int t = 1; t <= T; ++t) {
        for (int i = 0; i < n; ++i) {
            const size_t k = inst.at(t, i);
            Vec piv(static_cast<size_t>(p));
            for (auto& v : piv) v = static_cast<double>(rng.uniform_int(0, 10));
            Mat dm(m, p);
            for (auto& v : dm.data) v = static_cast<double>(rng.uniform_int(-5, 5));
            inst.pi[k] = std::move(piv);
            inst.D[k] = std::move(dm);
            inst.d[k] = matvec(inst.D[k], inst.x0[k]);
            Vec yv(static_cast<size_t>(p));
            const double s = 2.0 * (params.zeta2 + params.lambda2);
            for (int j = 0; j < p; ++j) {
                size_t jj = static_cast<size_t>(j);
                yv[jj] = (s * inst.x0[k][jj] + params.zeta1 * inst.pi[k][jj] + params.lambda1) /
                         (2.0 * params.zeta2);
            }
            inst.y[k] = std::move(yv);
            if (t < T) {
                Mat a = detail::random_doubly_stochastic(p, rng);
                // Clamp guards the box invariant against the ~1 ulp row-sum
                // drift of the convex combination.
                inst.x0[inst.at(t + 1, i)] = clamp_box(matvec(a, inst.x0[k]), lo, hi);
                inst.A[inst.dyn_at(t, i)] = std::move(a);
            }
        }
    }
    return inst;
}

// f_{i,t}: affine tracking penalty plus quadratic distance to the anchor.
inline CostEval tracking_cost(const TrackingInstance& inst, int i, int t, const Vec& x) {
    detail::check_round(inst, t);
    detail::check_agent(inst, i);
    if (static_cast<int>(x.size()) != inst.params.p)
        throw std::invalid_argument("tracking_cost: x has wrong dimension");
    const size_t k = inst.at(t, i);
    const Vec& piv = inst.pi[k];
    const Vec& yv = inst.y[k];
    CostEval e;
    e.grad.resize(x.size());
    double lin = 0.0, quad = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        lin += piv[j] * x[j];
        const double dj = x[j] - yv[j];
        quad += dj * dj;
        e.grad[j] = inst.params.zeta1 * piv[j] + 2.0 * inst.params.zeta2 * dj;
    }
    e.value = inst.params.zeta1 * lin + inst.params.zeta2 * quad;
    return e;
}

// g_{i,t}(x) = D x - d with constant Jacobian D.
inline ConstraintEval tracking_constraint(const TrackingInstance& inst, int i, int t, const Vec& x) {
    detail::check_round(inst, t);
    detail::check_agent(inst, i);
    if (static_cast<int>(x.size()) != inst.params.p)
        throw std::invalid_argument("tracking_constraint: x has wrong dimension");
    const size_t k = inst.at(t, i);
    ConstraintEval e;
    e.jac = inst.D[k];
    e.value = matvec(inst.D[k], x);
    for (int r = 0; r < inst.params.m; ++r) e.value[static_cast<size_t>(r)] -= inst.d[k][static_cast<size_t>(r)];
    return e;
}

// Whether the regularizer is handled by the mirror step as a structured term
// (Explicit) or folded into the revealed cost gradients (Folded); the composed
// round objective is identical either way.
enum class RegPlacement { Explicit, Folded };

class TrackingProblem : public OnlineProblem {
  public:
    TrackingProblem(TrackingInstance inst, RegPlacement placement = RegPlacement::Explicit)
        : inst_(std::make_shared<TrackingInstance>(std::move(inst))), placement_(placement) {
        domain_ = Domain::box_uniform(inst_->params.p, inst_->params.box_lo, inst_->params.box_hi);
    }
    TrackingProblem(std::shared_ptr<const TrackingInstance> inst, RegPlacement placement)
        : inst_(std::move(inst)), placement_(placement) {
        domain_ = Domain::box_uniform(inst_->params.p, inst_->params.box_lo, inst_->params.box_hi);
    }

    const TrackingInstance& instance() const { return *inst_; }
    RegPlacement placement() const { return placement_; }

    int num_agents() const override { return inst_->params.n; }
    int constraint_dim() const override { return inst_->params.m; }
    int horizon() const override { return inst_->params.horizon; }
    int dim(int) const override { return inst_->params.p; }
    const Domain& domain(int) const override { return domain_; }

    CostEval cost(int agent, int t, const Vec& x) const override {
        if (!domain_.contains(x)) throw std::invalid_argument("TrackingProblem::cost: x outside the box");
        CostEval e = tracking_cost(*inst_, agent, t, x);
        if (placement_ == RegPlacement::Folded) {
            RegularizerSpec r{inst_->params.lambda1, inst_->params.lambda2};
            e.value += regularizer_value(r, x);
            Vec sg = regularizer_subgrad(r, x);
            for (size_t j = 0; j < sg.size(); ++j) e.grad[j] += sg[j];
        }
        return e;
    }

    RegularizerSpec reg_spec(int, int) const override {
        if (placement_ == RegPlacement::Folded) return {};
        return {inst_->params.lambda1, inst_->params.lambda2};
    }

    ConstraintEval constraint(int agent, int t, const Vec& x) const override {
        if (!domain_.contains(x)) throw std::invalid_argument("TrackingProblem::constraint: x outside the box");
        return tracking_constraint(*inst_, agent, t, x);
    }

    std::optional<std::vector<Vec>> reference_optimum(int t) const override {
        detail::check_round(*inst_, t);
        std::vector<Vec> xs(static_cast<size_t>(inst_->params.n));
        for (int i = 0; i < inst_->params.n; ++i) xs[static_cast<size_t>(i)] = inst_->x0[inst_->at(t, i)];
        return xs;
    }

  private:
    std::shared_ptr<const TrackingInstance> inst_;
    RegPlacement placement_;
    Domain domain_;
};

}  // namespace dopd
