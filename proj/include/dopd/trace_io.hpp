#pragma once

// Instance trace persistence: the full revealed-data stream of a tracking
// instance in a line-oriented, versioned text format.
//
//   tracking-trace v1
//   n <n> m <m> p <p> T <horizon>
//   zeta1 <..> zeta2 <..> lambda1 <..> lambda2 <..>
//   box <lo> <hi>
//   seed <seed>
//   round <t>                 (t = 1..T, ascending)
//   agent <i>                 (i = 0..n-1, ascending)
//   pi <p values>
//   D <m*p values, row-major>
//   d <m values>
//   x0 <p values>
//   y <p values>
//   A <p*p values, row-major> (absent in round T)
//
// Values use the shortest decimal form that parses back to the same double
// (std::to_chars / std::from_chars), so save -> load is bit-exact and the
// files are locale-independent.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "dopd/problem.hpp"

namespace dopd {

struct TraceParseError : std::runtime_error {
    explicit TraceParseError(int line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline void append_row(std::string& out, const char* label, const double* v, size_t count) {
    out += label;
    for (size_t k = 0; k < count; ++k) {
        out += ' ';
        append_double(out, v[k]);
    }
    out += '\n';
}

inline double parse_double_token(const std::string& tok, int lineno) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw TraceParseError(lineno, "bad numeric token '" + tok + "'");
    return v;
}

}  // namespace detail

inline void save_trace(const TrackingInstance& inst, std::ostream& os) {
    const TrackingParams& pr = inst.params;
    std::string out;
    out.reserve(static_cast<size_t>(pr.horizon) * pr.n * 64);
    out += "tracking-trace v1\n";
    out += "n " + std::to_string(pr.n) + " m " + std::to_string(pr.m) + " p " + std::to_string(pr.p) +
           " T " + std::to_string(pr.horizon) + "\n";
    out += "zeta1 ";
    detail::append_double(out, pr.zeta1);
    out += " zeta2 ";
    detail::append_double(out, pr.zeta2);
    out += " lambda1 ";
    detail::append_double(out, pr.lambda1);
    out += " lambda2 ";
    detail::append_double(out, pr.lambda2);
    out += "\nbox ";
    detail::append_double(out, pr.box_lo);
    out += ' ';
    detail::append_double(out, pr.box_hi);
    out += "\nseed " + std::to_string(pr.seed) + "\n";
    for (int t = 1; t <= pr.horizon; ++t) {
        out += "round " + std::to_string(t) + "\n";
        for (int i = 0; i < pr.n; ++i) {
            const size_t k = inst.at(t, i);
            out += "agent " + std::to_string(i) + "\n";
            detail::append_row(out, "pi", inst.pi[k].data(), inst.pi[k].size());
            detail::append_row(out, "D", inst.D[k].data.data(), inst.D[k].data.size());
            detail::append_row(out, "d", inst.d[k].data(), inst.d[k].size());
            detail::append_row(out, "x0", inst.x0[k].data(), inst.x0[k].size());
            detail::append_row(out, "y", inst.y[k].data(), inst.y[k].size());
            if (t < pr.horizon) {
                const Mat& a = inst.A[inst.dyn_at(t, i)];
                detail::append_row(out, "A", a.data.data(), a.data.size());
            }
        }
    }
    os << out;
}

inline void save_trace(const TrackingInstance& inst, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_trace: cannot open '" + path + "' for writing");
    save_trace(inst, f);
    if (!f.good()) throw std::runtime_error("save_trace: write to '" + path + "' failed");
}

inline TrackingInstance load_trace(std::istream& is) {
    std::string line;
    int lineno = 0;
    auto next_line = [&]() {
        if (!std::getline(is, line)) throw TraceParseError(lineno, "unexpected end of file");
        ++lineno;
        return true;
    };

    next_line();
    if (line != "tracking-trace v1") throw TraceParseError(lineno, "bad header, expected 'tracking-trace v1'");

    TrackingParams pr;
    next_line();
    {
        std::istringstream ss(line);
        std::string kn, km, kp, kt;
        if (!(ss >> kn >> pr.n >> km >> pr.m >> kp >> pr.p >> kt >> pr.horizon) || kn != "n" || km != "m" ||
            kp != "p" || kt != "T")
            throw TraceParseError(lineno, "bad size line");
        if (pr.n < 1 || pr.m < 1 || pr.p < 1 || pr.horizon < 1) throw TraceParseError(lineno, "invalid sizes");
    }
    next_line();
    {
        std::istringstream ss(line);
        std::string k1, k2, k3, k4, v1, v2, v3, v4;
        if (!(ss >> k1 >> v1 >> k2 >> v2 >> k3 >> v3 >> k4 >> v4) || k1 != "zeta1" || k2 != "zeta2" ||
            k3 != "lambda1" || k4 != "lambda2")
            throw TraceParseError(lineno, "bad coefficient line");
        pr.zeta1 = detail::parse_double_token(v1, lineno);
        pr.zeta2 = detail::parse_double_token(v2, lineno);
        pr.lambda1 = detail::parse_double_token(v3, lineno);
        pr.lambda2 = detail::parse_double_token(v4, lineno);
    }
    next_line();
    {
        std::istringstream ss(line);
        std::string kb, v1, v2;
        if (!(ss >> kb >> v1 >> v2) || kb != "box") throw TraceParseError(lineno, "bad box line");
        pr.box_lo = detail::parse_double_token(v1, lineno);
        pr.box_hi = detail::parse_double_token(v2, lineno);
    }
    next_line();
    {
        std::istringstream ss(line);
        std::string ks;
        if (!(ss >> ks >> pr.seed) || ks != "seed") throw TraceParseError(lineno, "bad seed line");
    }

    TrackingInstance inst;
    inst.params = pr;
    const size_t cells = static_cast<size_t>(pr.horizon) * pr.n;
    inst.pi.resize(cells);
    inst.D.resize(cells);
    inst.d.resize(cells);
    inst.x0.resize(cells);
    inst.y.resize(cells);
    if (pr.horizon > 1) inst.A.resize(static_cast<size_t>(pr.horizon - 1) * pr.n);

    auto parse_values = [&](const std::string& label, size_t count) {
        next_line();
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != label) throw TraceParseError(lineno, "expected '" + label + "' row, got '" + got + "'");
        std::vector<double> vals(count);
        std::string tok;
        for (size_t k = 0; k < count; ++k) {
            if (!(ss >> tok)) throw TraceParseError(lineno, "'" + label + "' row has too few values");
            vals[k] = detail::parse_double_token(tok, lineno);
        }
        std::string extra;
        if (ss >> extra) throw TraceParseError(lineno, "'" + label + "' row has too many values");
        return vals;
    };

    const size_t p = static_cast<size_t>(pr.p), m = static_cast<size_t>(pr.m);
    for (int t = 1; t <= pr.horizon; ++t) {
        next_line();
        {
            std::istringstream ss(line);
            std::string kr;
            int tt = 0;
            if (!(ss >> kr >> tt) || kr != "round" || tt != t)
                throw TraceParseError(lineno, "expected 'round " + std::to_string(t) + "'");
        }
        for (int i = 0; i < pr.n; ++i) {
            next_line();
            {
                std::istringstream ss(line);
                std::string ka;
                int ii = -1;
                if (!(ss >> ka >> ii) || ka != "agent" || ii != i)
                    throw TraceParseError(lineno, "expected 'agent " + std::to_string(i) + "'");
            }
            const size_t k = inst.at(t, i);
            inst.pi[k] = parse_values("pi", p);
            Mat dm(pr.m, pr.p);
            dm.data = parse_values("D", m * p);
            inst.D[k] = std::move(dm);
            inst.d[k] = parse_values("d", m);
            inst.x0[k] = parse_values("x0", p);
            inst.y[k] = parse_values("y", p);
            if (t < pr.horizon) {
                Mat a(pr.p, pr.p);
                a.data = parse_values("A", p * p);
                inst.A[inst.dyn_at(t, i)] = std::move(a);
            }
        }
    }
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") != std::string::npos)
            throw TraceParseError(lineno, "trailing content after the final record");
    }
    return inst;
}

inline TrackingInstance load_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_trace: cannot open '" + path + "'");
    return load_trace(f);
}

}  // namespace dopd
