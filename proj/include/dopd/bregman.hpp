#pragma once

// Bregman geometry for the mirror-descent primal update.
//
// Supported mirror maps:
//   ScaledEuclidean  psi(x) = sigma * ||x||^2      (strong convexity 2*sigma)
//   KL               psi(x) = sum_j x_j log x_j - x_j  on the simplex
//                                                       (strong convexity 1, Pinsker)
//
// The mirror step solves, over the domain X,
//   argmin_x  alpha*<a, x> + alpha*(l1*||x||_1 + l2*||x||^2) + D_psi(x, x_prev)
// with exact per-coordinate closed forms where they exist and an iterative
// proximal solver otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dopd/linalg.hpp"

namespace dopd {

// ---------------------------------------------------------------- domains

struct Domain {
    enum class Kind { Box, Simplex };

    Kind kind = Kind::Box;
    int dim = 0;
    Vec lo, hi;  // box bounds; empty for simplex

    static Domain box(Vec lo_, Vec hi_) {
        if (lo_.size() != hi_.size() || lo_.empty()) throw std::invalid_argument("Domain::box: bad bounds");
        for (size_t j = 0; j < lo_.size(); ++j)
            if (!(lo_[j] <= hi_[j])) throw std::invalid_argument("Domain::box: lo > hi");
        Domain d;
        d.kind = Kind::Box;
        d.dim = static_cast<int>(lo_.size());
        d.lo = std::move(lo_);
        d.hi = std::move(hi_);
        return d;
    }

    static Domain box_uniform(int dim_, double lo_, double hi_) {
        return box(Vec(static_cast<size_t>(dim_), lo_), Vec(static_cast<size_t>(dim_), hi_));
    }

    static Domain simplex(int dim_) {
        if (dim_ < 1) throw std::invalid_argument("Domain::simplex: dim < 1");
        Domain d;
        d.kind = Kind::Simplex;
        d.dim = dim_;
        return d;
    }

    bool contains(const Vec& x, double tol = 1e-9) const {
        if (static_cast<int>(x.size()) != dim) return false;
        if (kind == Kind::Box) {
            for (int j = 0; j < dim; ++j) {
                size_t k = static_cast<size_t>(j);
                if (x[k] < lo[k] - tol || x[k] > hi[k] + tol) return false;
            }
            return true;
        }
        double s = 0.0;
        for (double v : x) {
            if (v < -tol) return false;
            s += v;
        }
        return std::fabs(s - 1.0) <= tol;
    }

    // Euclidean diameter sup ||x - y|| over the domain.
    double diameter() const {
        if (kind == Kind::Box) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) {
                double w = hi[static_cast<size_t>(j)] - lo[static_cast<size_t>(j)];
                s += w * w;
            }
            return std::sqrt(s);
        }
        return dim > 1 ? std::sqrt(2.0) : 0.0;
    }

    // sup ||x|| over the domain (per-coordinate corner maxima for a box).
    double max_norm() const {
        if (kind == Kind::Box) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) {
                double m = std::max(std::fabs(lo[static_cast<size_t>(j)]), std::fabs(hi[static_cast<size_t>(j)]));
                s += m * m;
            }
            return std::sqrt(s);
        }
        return 1.0;
    }

    Vec midpoint() const {
        Vec x(static_cast<size_t>(dim));
        if (kind == Kind::Box) {
            for (int j = 0; j < dim; ++j)
                x[static_cast<size_t>(j)] = 0.5 * (lo[static_cast<size_t>(j)] + hi[static_cast<size_t>(j)]);
        } else {
            for (auto& v : x) v = 1.0 / dim;
        }
        return x;
    }
};

// Euclidean projection onto the probability simplex (sort-based).
inline Vec project_simplex(const Vec& v) {
    const int n = static_cast<int>(v.size());
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        css += u[static_cast<size_t>(i)];
        double t = (css - 1.0) / (i + 1);
        if (u[static_cast<size_t>(i)] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    Vec x(v.size());
    for (size_t i = 0; i < v.size(); ++i) x[i] = std::max(v[i] - theta, 0.0);
    return x;
}

// Projection onto a domain (box clamp / simplex projection).
inline Vec project_domain(const Domain& d, Vec x) {
    if (d.kind == Domain::Kind::Box) return clamp_box(std::move(x), d.lo, d.hi);
    return project_simplex(x);
}

// ---------------------------------------------------------------- regularizer

// Structured regularizer r(x) = l1*||x||_1 + l2*||x||^2, kept un-linearized
// inside the mirror step. l1, l2 >= 0.
struct RegularizerSpec {
    double l1 = 0.0;
    double l2 = 0.0;

    bool is_zero() const { return l1 == 0.0 && l2 == 0.0; }
};

inline double regularizer_value(const RegularizerSpec& r, const Vec& x) {
    return r.l1 * norm1(x) + r.l2 * dot(x, x);
}

// A subgradient of r at x (the sign choice 0 at kinks).
inline Vec regularizer_subgrad(const RegularizerSpec& r, const Vec& x) {
    Vec g(x.size());
    for (size_t j = 0; j < x.size(); ++j) {
        double s = x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0);
        g[j] = r.l1 * s + 2.0 * r.l2 * x[j];
    }
    return g;
}

// ---------------------------------------------------------------- geometry

struct BregmanGeometry {
    enum class Kind { ScaledEuclidean, KL };

    Kind kind = Kind::ScaledEuclidean;
    double sigma = 0.5;  // scale of psi for ScaledEuclidean (psi = sigma*||x||^2)
    Domain domain;
    // KL only: sampling floor delta for the interior on which the divergence
    // is treated as Lipschitz; psi' = log(x) is unbounded at the boundary, so
    // a finite constant only exists on {x : x_j >= delta}.
    double kl_interior_floor = 1e-3;

    static BregmanGeometry scaled_euclidean(double sigma_, Domain d) {
        if (!(sigma_ > 0.0)) throw std::invalid_argument("BregmanGeometry: sigma must be positive");
        BregmanGeometry g;
        g.kind = Kind::ScaledEuclidean;
        g.sigma = sigma_;
        g.domain = std::move(d);
        return g;
    }

    static BregmanGeometry kl(int dim, double interior_floor = 1e-3) {
        if (!(interior_floor > 0.0) || interior_floor >= 1.0 / dim)
            throw std::invalid_argument("BregmanGeometry: KL interior floor must lie in (0, 1/dim)");
        BregmanGeometry g;
        g.kind = Kind::KL;
        g.domain = Domain::simplex(dim);
        g.kl_interior_floor = interior_floor;
        return g;
    }

    // Modulus of strong convexity of psi w.r.t. ||.||_2 over the domain.
    double strong_convexity() const { return kind == Kind::ScaledEuclidean ? 2.0 * sigma : 1.0; }

    // Lipschitz constant of D_psi(., y) over the stated domain: the maximum of
    // ||grad psi(x) - grad psi(y)||. ScaledEuclidean: 2*sigma*diam(X). KL: the
    // bound holds on the floored interior only.
    double lipschitz_constant() const {
        if (kind == Kind::ScaledEuclidean) return 2.0 * sigma * domain.diameter();
        return std::sqrt(static_cast<double>(domain.dim)) * (-std::log(kl_interior_floor));
    }

    Vec grad_psi(const Vec& x) const {
        Vec g(x.size());
        if (kind == Kind::ScaledEuclidean) {
            for (size_t j = 0; j < x.size(); ++j) g[j] = 2.0 * sigma * x[j];
        } else {
            for (size_t j = 0; j < x.size(); ++j) {
                if (!(x[j] > 0.0)) throw std::invalid_argument("grad_psi: KL needs strictly positive x");
                g[j] = std::log(x[j]);
            }
        }
        return g;
    }
};

// D_psi(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>.
// ScaledEuclidean: sigma*||x - y||^2. KL: sum x_j log(x_j / y_j) with 0log0=0.
inline double bregman_divergence(const BregmanGeometry& g, const Vec& x, const Vec& y) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != g.domain.dim)
        throw std::invalid_argument("bregman_divergence: dimension mismatch");
    if (g.kind == BregmanGeometry::Kind::ScaledEuclidean) {
        double s = 0.0;
        for (size_t j = 0; j < x.size(); ++j) {
            double d = x[j] - y[j];
            s += d * d;
        }
        return g.sigma * s;
    }
    double s = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        if (!(y[j] > 0.0)) throw std::invalid_argument("bregman_divergence: KL needs y > 0");
        if (x[j] < 0.0) throw std::invalid_argument("bregman_divergence: KL needs x >= 0");
        if (x[j] > 0.0) s += x[j] * std::log(x[j] / y[j]);
    }
    return s;
}

// Componentwise projection onto the nonnegative orthant (the dual update cone).
inline Vec nonneg_project(Vec z) {
    for (auto& v : z) v = std::max(v, 0.0);
    return z;
}

// Value of the composite step objective
//   h(x) + D_psi(x, x_prev),  h(x) = alpha*<a,x> + alpha*r(x).
inline double mirror_step_objective(const BregmanGeometry& g, const Vec& x_prev, const Vec& a,
                                    const RegularizerSpec& reg, double alpha, const Vec& x) {
    return alpha * dot(a, x) + alpha * regularizer_value(reg, x) + bregman_divergence(g, x, x_prev);
}

namespace detail {

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// Exact per-coordinate solution for ScaledEuclidean geometry on a box:
//   min_x alpha*a_j*x + alpha*l1*|x| + alpha*l2*x^2 + sigma*(x - p_j)^2
// over [lo_j, hi_j]; the unconstrained soft-threshold solution clamps exactly
// because each coordinate objective is strictly convex.
inline Vec mirror_step_se_box(const BregmanGeometry& g, const Vec& x_prev, const Vec& a,
                              const RegularizerSpec& reg, double alpha) {
    const Domain& d = g.domain;
    Vec x(x_prev.size());
    const double denom = 2.0 * g.sigma + 2.0 * alpha * reg.l2;
    for (size_t j = 0; j < x.size(); ++j) {
        double v = soft_threshold(2.0 * g.sigma * x_prev[j] - alpha * a[j], alpha * reg.l1) / denom;
        if (v < d.lo[j]) v = d.lo[j];
        if (v > d.hi[j]) v = d.hi[j];
        x[j] = v;
    }
    return x;
}

// Exact KL/simplex solution without regularizer: exponentiated gradient,
//   x_j proportional to x_prev_j * exp(-alpha*a_j), renormalized.
inline Vec mirror_step_kl_simplex(const Vec& x_prev, const Vec& a, double alpha) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < x_prev.size(); ++j)
        if (x_prev[j] > 0.0) mx = std::max(mx, std::log(x_prev[j]) - alpha * a[j]);
    Vec x(x_prev.size(), 0.0);
    double z = 0.0;
    for (size_t j = 0; j < x_prev.size(); ++j) {
        if (x_prev[j] > 0.0) {
            x[j] = std::exp(std::log(x_prev[j]) - alpha * a[j] - mx);
            z += x[j];
        }
    }
    for (auto& v : x) v /= z;
    return x;
}

}  // namespace detail

struct MirrorStepOptions {
    double tol = 1e-10;       // gradient-map residual target for the iterative path
    long max_iters = 100000;  // hard cap; exceeding it throws
};

// Iterative inner solver for the composite step objective. Used directly for
// geometry/domain combinations without a closed form and as an independent
// cross-check of the closed forms.
//  - ScaledEuclidean + Box:     proximal gradient (soft-threshold + clamp prox)
//  - ScaledEuclidean + Simplex: projected gradient (||.||_1 is constant there)
//  - KL + Simplex:              multiplicative mirror iterations (stay interior)
inline Vec mirror_step_iterative(const BregmanGeometry& g, const Vec& x_prev, const Vec& a,
                                 const RegularizerSpec& reg, double alpha,
                                 const MirrorStepOptions& opt = {}) {
    const Domain& d = g.domain;
    const size_t p = x_prev.size();

    if (g.kind == BregmanGeometry::Kind::ScaledEuclidean) {
        // Smooth part alpha*<a,x> + alpha*l2*||x||^2 + sigma*||x - x_prev||^2,
        // gradient Lipschitz constant L below; prox handles l1 + box.
        const double L = 2.0 * alpha * reg.l2 + 2.0 * g.sigma;
        const double step = 1.0 / L;
        Vec x = project_domain(d, x_prev);
        for (long it = 0; it < opt.max_iters; ++it) {
            Vec grad(p);
            for (size_t j = 0; j < p; ++j)
                grad[j] = alpha * a[j] + 2.0 * alpha * reg.l2 * x[j] + 2.0 * g.sigma * (x[j] - x_prev[j]);
            Vec xn(p);
            if (d.kind == Domain::Kind::Box) {
                for (size_t j = 0; j < p; ++j) {
                    double v = detail::soft_threshold(x[j] - step * grad[j], step * alpha * reg.l1);
                    if (v < d.lo[j]) v = d.lo[j];
                    if (v > d.hi[j]) v = d.hi[j];
                    xn[j] = v;
                }
            } else {
                // On the simplex ||x||_1 == 1, so the l1 term is a constant.
                Vec y(p);
                for (size_t j = 0; j < p; ++j) y[j] = x[j] - step * grad[j];
                xn = project_simplex(y);
            }
            double res = 0.0;
            for (size_t j = 0; j < p; ++j) res += (xn[j] - x[j]) * (xn[j] - x[j]);
            res = std::sqrt(res) / step;
            x = std::move(xn);
            if (res <= opt.tol) return x;
        }
        throw std::runtime_error("mirror_step_iterative: no convergence within iteration cap");
    }

    // KL on the simplex. Multiplicative updates keep iterates strictly
    // positive; relative smoothness of the objective w.r.t. KL gives the step.
    if (d.kind != Domain::Kind::Simplex)
        throw std::invalid_argument("mirror_step_iterative: KL geometry requires a simplex domain");
    for (size_t j = 0; j < p; ++j)
        if (!(x_prev[j] > 0.0))
            throw std::invalid_argument("mirror_step_iterative: KL step needs strictly positive x_prev");
    const double step = 1.0 / (1.0 + 2.0 * alpha * reg.l2);
    Vec x = x_prev;
    for (long it = 0; it < opt.max_iters; ++it) {
        // grad of alpha*<a,x> + alpha*l2*||x||^2 + KL(x, x_prev); the l1 term
        // is constant on the simplex.
        Vec expo(p);
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < p; ++j) {
            double grad_j = alpha * a[j] + 2.0 * alpha * reg.l2 * x[j] + (std::log(x[j]) - std::log(x_prev[j])) + 1.0;
            expo[j] = std::log(x[j]) - step * grad_j;
            mx = std::max(mx, expo[j]);
        }
        Vec xn(p);
        double z = 0.0;
        for (size_t j = 0; j < p; ++j) {
            xn[j] = std::exp(expo[j] - mx);
            z += xn[j];
        }
        for (auto& v : xn) v /= z;
        double res = 0.0;
        for (size_t j = 0; j < p; ++j) res += (xn[j] - x[j]) * (xn[j] - x[j]);
        res = std::sqrt(res) / step;
        x = std::move(xn);
        if (res <= opt.tol) return x;
    }
    throw std::runtime_error("mirror_step_iterative: no convergence within iteration cap");
}

// The primal update: argmin over the domain of
//   alpha*<a, x> + alpha*r(x) + D_psi(x, x_prev).
// Dispatches to the exact closed form when one exists.
inline Vec mirror_step(const BregmanGeometry& g, const Vec& x_prev, const Vec& a,
                       const RegularizerSpec& reg, double alpha, const MirrorStepOptions& opt = {}) {
    if (x_prev.size() != a.size() || static_cast<int>(x_prev.size()) != g.domain.dim)
        throw std::invalid_argument("mirror_step: dimension mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("mirror_step: alpha must be positive");
    if (reg.l1 < 0.0 || reg.l2 < 0.0) throw std::invalid_argument("mirror_step: negative regularizer weight");
    if (!g.domain.contains(x_prev))
        throw std::invalid_argument("mirror_step: x_prev outside the domain");

    if (g.kind == BregmanGeometry::Kind::ScaledEuclidean && g.domain.kind == Domain::Kind::Box)
        return detail::mirror_step_se_box(g, x_prev, a, reg, alpha);
    if (g.kind == BregmanGeometry::Kind::KL && g.domain.kind == Domain::Kind::Simplex && reg.is_zero())
        return detail::mirror_step_kl_simplex(x_prev, a, alpha);
    return mirror_step_iterative(g, x_prev, a, reg, alpha, opt);
}

// Bound on ||grad h|| over the domain for h(x) = alpha*<a,x> + alpha*r(x):
//   alpha*||a|| + alpha*(l1*sqrt(p) + 2*l2*sup||x||).
inline double step_subgradient_bound(const Domain& d, const Vec& a, const RegularizerSpec& reg, double alpha) {
    return alpha * norm2(a) +
           alpha * (reg.l1 * std::sqrt(static_cast<double>(d.dim)) + 2.0 * reg.l2 * d.max_norm());
}

// Checks the step-size contract ||x_tilde - x_prev|| <= G_h / sigma_i with a
// 1e-12 absolute slack for accumulated rounding.
inline bool mirror_step_deviation(const BregmanGeometry& g, const Vec& x_prev, const Vec& x_tilde,
                                  double grad_bound) {
    return norm2(sub(x_tilde, x_prev)) <= grad_bound / g.strong_convexity() + 1e-12;
}

// A subgradient of h(x) = alpha*<a,x> + alpha*r(x) at the step output that
// certifies optimality: at l1 kinks (x_j == 0) the sign is chosen from the
// first-order condition of the solved subproblem instead of the arbitrary 0.
inline Vec certifying_step_subgradient(const BregmanGeometry& g, const Vec& x_prev, const Vec& x_tilde,
                                       const Vec& a, const RegularizerSpec& reg, double alpha) {
    Vec gp_t = g.grad_psi(x_tilde);
    Vec gp_p = g.grad_psi(x_prev);
    Vec h(x_tilde.size());
    for (size_t j = 0; j < x_tilde.size(); ++j) {
        double s;
        if (x_tilde[j] > 0.0)
            s = 1.0;
        else if (x_tilde[j] < 0.0)
            s = -1.0;
        else if (reg.l1 > 0.0) {
            // Pick the subgradient in [-1,1] that zeroes the stationarity
            // residual at the kink, clipped to the valid interval.
            double resid = alpha * a[j] + 2.0 * alpha * reg.l2 * x_tilde[j] + (gp_t[j] - gp_p[j]);
            s = std::min(1.0, std::max(-1.0, -resid / (alpha * reg.l1)));
        } else {
            s = 0.0;
        }
        h[j] = alpha * a[j] + alpha * (reg.l1 * s + 2.0 * reg.l2 * x_tilde[j]);
    }
    return h;
}

// Slack of the three-point inequality at the step output: for any comparator x
// in the domain,
//   <x_tilde - x, grad h(x_tilde)> <= D(x, x_prev) - D(x, x_tilde) - D(x_tilde, x_prev).
// Returns lhs - rhs (nonpositive up to rounding when the step is optimal).
inline double three_point_slack(const BregmanGeometry& g, const Vec& x_prev, const Vec& x_tilde,
                                const Vec& a, const RegularizerSpec& reg, double alpha, const Vec& x) {
    Vec h = certifying_step_subgradient(g, x_prev, x_tilde, a, reg, alpha);
    double lhs = dot(sub(x_tilde, x), h);
    double rhs = bregman_divergence(g, x, x_prev) - bregman_divergence(g, x, x_tilde) -
                 bregman_divergence(g, x_tilde, x_prev);
    return lhs - rhs;
}

}  // namespace dopd
