#pragma once

// Shared helpers for the test suite: independent slow oracles (golden-section
// coordinate search, small-step projected descent), finite differences, and a
// scripted problem type for hand-built tiny instances.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dopd/algorithm.hpp"
#include "dopd/bregman.hpp"
#include "dopd/problem.hpp"

namespace testsupport {

using dopd::Domain;
using dopd::Mat;
using dopd::Vec;

// Central finite-difference gradient of a scalar function.
template <typename F>
Vec fd_gradient(F f, const Vec& x, double h = 1e-6) {
    Vec g(x.size());
    Vec xp = x;
    for (size_t j = 0; j < x.size(); ++j) {
        const double xj = x[j];
        xp[j] = xj + h;
        const double fp = f(xp);
        xp[j] = xj - h;
        const double fm = f(xp);
        xp[j] = xj;
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Golden-section minimization of a unimodal scalar function on [lo, hi].
template <typename F>
double golden_section(F f, double lo, double hi, int iters = 200) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters && b - a > 1e-15; ++k) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Slow independent mirror-step oracle for the scaled-Euclidean geometry on a
// box: the objective is separable, so cyclic coordinate golden-section search
// converges to machine precision in a few sweeps.
inline Vec brute_mirror_step_box(const dopd::BregmanGeometry& geom, const Vec& x_prev, const Vec& a,
                                 const dopd::RegularizerSpec& reg, double alpha) {
    if (geom.kind != dopd::BregmanGeometry::Kind::ScaledEuclidean ||
        geom.domain.kind != Domain::Kind::Box)
        throw std::invalid_argument("brute_mirror_step_box: wrong geometry");
    Vec x = x_prev;
    for (int sweep = 0; sweep < 4; ++sweep) {
        for (size_t j = 0; j < x.size(); ++j) {
            auto along = [&](double v) {
                // Separable piece of the mirror-step objective in coordinate j.
                return alpha * a[j] * v + alpha * (reg.l1 * std::fabs(v) + reg.l2 * v * v) +
                       geom.sigma * (v - x_prev[j]) * (v - x_prev[j]);
            };
            x[j] = golden_section(along, geom.domain.lo[j], geom.domain.hi[j]);
        }
    }
    return x;
}

// Slow independent mirror-step oracle for simplex domains: small-step
// projected (Euclidean) or multiplicative (KL) descent on the full
// mirror-step objective, run far past the accuracy needed.
inline Vec brute_mirror_step_simplex(const dopd::BregmanGeometry& geom, const Vec& x_prev,
                                     const Vec& a, const dopd::RegularizerSpec& reg, double alpha,
                                     long iters = 400000) {
    if (geom.domain.kind != Domain::Kind::Simplex)
        throw std::invalid_argument("brute_mirror_step_simplex: wrong domain");
    auto obj = [&](const Vec& v) { return dopd::mirror_step_objective(geom, x_prev, a, reg, alpha, v); };
    Vec x(x_prev.size(), 1.0 / static_cast<double>(x_prev.size()));
    double step = 1e-3;
    double best = obj(x);
    Vec bestx = x;
    for (long k = 0; k < iters; ++k) {
        Vec g = fd_gradient(obj, x, 1e-7);
        Vec y(x.size());
        if (geom.kind == dopd::BregmanGeometry::Kind::KL) {
            double tot = 0.0;
            for (size_t j = 0; j < x.size(); ++j) {
                y[j] = x[j] * std::exp(-step * g[j]);
                tot += y[j];
            }
            for (double& v : y) v /= tot;
        } else {
            for (size_t j = 0; j < x.size(); ++j) y[j] = x[j] - step * g[j];
            y = dopd::project_simplex(y);
        }
        double fy = obj(y);
        if (fy < best) {
            best = fy;
            bestx = y;
        }
        x = std::move(y);
    }
    return bestx;
}

// A fully scripted online problem: everything supplied as tables/callbacks.
// Used for hand-computable engine and oracle tests.
class ScriptedProblem : public dopd::OnlineProblem {
  public:
    using CostFn = std::function<dopd::CostEval(int i, int t, const Vec& x)>;
    using ConsFn = std::function<dopd::ConstraintEval(int i, int t, const Vec& x)>;

    ScriptedProblem(std::vector<Domain> domains, int m, int horizon, CostFn cost, ConsFn cons,
                    dopd::RegularizerSpec reg = {})
        : domains_(std::move(domains)), m_(m), horizon_(horizon), cost_(std::move(cost)),
          cons_(std::move(cons)), reg_(reg) {}

    int num_agents() const override { return static_cast<int>(domains_.size()); }
    int constraint_dim() const override { return m_; }
    int horizon() const override { return horizon_; }
    int dim(int i) const override { return domains_[static_cast<size_t>(i)].dim; }
    const Domain& domain(int i) const override { return domains_[static_cast<size_t>(i)]; }
    dopd::CostEval cost(int i, int t, const Vec& x) const override { return cost_(i, t, x); }
    dopd::RegularizerSpec reg_spec(int, int) const override { return reg_; }
    dopd::ConstraintEval constraint(int i, int t, const Vec& x) const override {
        return cons_(i, t, x);
    }

  private:
    std::vector<Domain> domains_;
    int m_, horizon_;
    CostFn cost_;
    ConsFn cons_;
    dopd::RegularizerSpec reg_;
};

// Quadratic tracking cell: f(x) = zeta1 <pi, x> + zeta2 ||x - y||^2.
inline dopd::CostEval quad_cost(double zeta1, double zeta2, const Vec& pi, const Vec& y,
                                const Vec& x) {
    dopd::CostEval e;
    e.value = 0.0;
    e.grad.resize(x.size());
    for (size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        e.value += zeta1 * pi[j] * x[j] + zeta2 * d * d;
        e.grad[j] = zeta1 * pi[j] + 2.0 * zeta2 * d;
    }
    return e;
}

// Linear constraint cell: g(x) = M x - b.
inline dopd::ConstraintEval lin_cons(const Mat& M, const Vec& b, const Vec& x) {
    dopd::ConstraintEval e;
    e.value = dopd::matvec(M, x);
    for (size_t k = 0; k < e.value.size(); ++k) e.value[k] -= b[k];
    e.jac = M;
    return e;
}

}  // namespace testsupport
