#pragma once

// Small dense vector/matrix helpers. Dimensions in this library are tiny
// (per-agent decision dims <= 8, constraint dims <= 5, agents <= 50), so a
// thin layer over std::vector keeps everything header-only and the arithmetic
// order fixed, which the bit-exact replay machinery relies on.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dopd {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += std::fabs(v);
    return s;
}

inline double norm_inf(const Vec& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::fabs(v));
    return s;
}

inline Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: size mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: size mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(double c, const Vec& a) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// r += c*a
inline void axpy(double c, const Vec& a, Vec& r) {
    if (a.size() != r.size()) throw std::invalid_argument("axpy: size mismatch");
    for (size_t i = 0; i < a.size(); ++i) r[i] += c * a[i];
}

inline Vec matvec(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: size mismatch");
    Vec r(static_cast<size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        r[static_cast<size_t>(i)] = s;
    }
    return r;
}

// m^T * x
inline Vec mat_tvec(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("mat_tvec: size mismatch");
    Vec r(static_cast<size_t>(m.cols), 0.0);
    for (int j = 0; j < m.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < m.rows; ++i) s += m(i, j) * x[static_cast<size_t>(i)];
        r[static_cast<size_t>(j)] = s;
    }
    return r;
}

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return std::sqrt(s);
}

inline Vec clamp_box(Vec x, const Vec& lo, const Vec& hi) {
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i]) x[i] = lo[i];
        if (x[i] > hi[i]) x[i] = hi[i];
    }
    return x;
}

}  // namespace dopd
