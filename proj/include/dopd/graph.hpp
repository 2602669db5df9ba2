#pragma once

// Time-varying communication graphs and the consensus mixing step.
//
// Experiment protocol: undirected edges, mixing weight 1/n on every edge,
// remainder on the diagonal. A fixed path over agents 0..n-1 is always
// present, and every other unordered pair joins independently with a given
// probability each round, so every single round is connected (window 1) and
// the positive-weight floor is 1/n.

#include <cstdint>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dopd/linalg.hpp"
#include "dopd/rng.hpp"

namespace dopd {

// Directed communication link: `to` receives from `from`. The experiment
// protocol always stores both directions of an undirected edge.
struct Edge {
    int from = 0;
    int to = 0;
};

struct CommGraphSequence {
    int n = 0;
    double weight_floor = 0.0;  // guaranteed lower bound on positive weights
    int window = 1;             // joint-connectivity window length
    std::vector<std::vector<Edge>> rounds;
    std::vector<Mat> weights;  // one mixing matrix per round
};

// Mixing matrix from an undirected edge set: [W]_{ij} = 1/n for each link
// (j -> i), diagonal takes the remainder. The edge set must contain both
// directions of every link, no self-loops and no duplicates.
inline Mat build_weights(const std::vector<Edge>& edges, int n) {
    if (n < 1) throw std::invalid_argument("build_weights: n < 1");
    Mat has(n, n, 0.0);
    for (const Edge& e : edges) {
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
            throw std::invalid_argument("build_weights: edge endpoint out of range");
        if (e.from == e.to) throw std::invalid_argument("build_weights: self-loop in edge set");
        if (has(e.to, e.from) != 0.0) throw std::invalid_argument("build_weights: duplicate edge");
        has(e.to, e.from) = 1.0;
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (has(i, j) != has(j, i))
                throw std::invalid_argument("build_weights: edge set is not symmetric");
    Mat w(n, n, 0.0);
    const double unit = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        int degree = 0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (has(i, j) != 0.0) {
                w(i, j) = unit;
                ++degree;
            }
        }
        double diag = 1.0 - degree * unit;
        if (diag < 0.0) throw std::invalid_argument("build_weights: degree exceeds n-1");
        w(i, i) = diag;
    }
    return w;
}

// Random sequence of T rounds: path backbone plus independent extra pairs with
// probability rho. Pair order of the probability draws is fixed (i<j,
// lexicographic), so a seed pins the sequence exactly.
inline CommGraphSequence generate_graph_sequence(int n, double rho, int rounds, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_graph_sequence: n < 1");
    if (rounds < 1) throw std::invalid_argument("generate_graph_sequence: rounds < 1");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("generate_graph_sequence: rho outside [0,1]");
    CommGraphSequence seq;
    seq.n = n;
    seq.weight_floor = 1.0 / n;
    seq.window = 1;
    seq.rounds.resize(static_cast<size_t>(rounds));
    seq.weights.resize(static_cast<size_t>(rounds));
    Rng rng(seed);
    for (int t = 0; t < rounds; ++t) {
        std::vector<Edge>& es = seq.rounds[static_cast<size_t>(t)];
        for (int i = 0; i + 1 < n; ++i) {
            es.push_back({i, i + 1});
            es.push_back({i + 1, i});
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (j == i + 1) continue;  // backbone already present
                if (rng.uniform() < rho) {
                    es.push_back({i, j});
                    es.push_back({j, i});
                }
            }
        }
        seq.weights[static_cast<size_t>(t)] = build_weights(es, n);
    }
    return seq;
}

namespace detail {

// Strong connectivity of a directed graph given as an adjacency matrix of
// 0/1 entries (self-loops implicit): forward and reverse reachability from 0.
inline bool strongly_connected(const Mat& adj) {
    const int n = adj.rows;
    if (n <= 1) return true;
    auto reach = [&](bool reverse) {
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v) {
                if (seen[static_cast<size_t>(v)]) continue;
                double a = reverse ? adj(u, v) : adj(v, u);  // edge u -> v means v receives from u
                if (a != 0.0) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++count;
                    q.push(v);
                }
            }
        }
        return count == n;
    };
    return reach(false) && reach(true);
}

}  // namespace detail

struct GraphCheckReport {
    bool ok = true;
    std::string message = "ok";
    int round = -1;  // first offending round (0-based), or window start
};

// Validates the standing network conditions on a whole sequence:
//  (1) every mixing matrix is nonnegative and doubly stochastic to 1e-12,
//  (2) every positive weight (and every diagonal) is >= the stated floor,
//      with 1e-12 slack for the diagonal remainder arithmetic,
//  (3) the union graph over every `window` consecutive rounds is strongly
//      connected (all complete windows; a shorter prefix falls back to the
//      union of all rounds).
inline GraphCheckReport check_assumption1(const CommGraphSequence& seq) {
    GraphCheckReport rep;
    const int n = seq.n;
    const double tol = 1e-12;
    for (size_t t = 0; t < seq.weights.size(); ++t) {
        const Mat& w = seq.weights[t];
        if (w.rows != n || w.cols != n) {
            rep.ok = false;
            rep.round = static_cast<int>(t);
            rep.message = "mixing matrix has wrong shape at round " + std::to_string(t);
            return rep;
        }
        for (int i = 0; i < n; ++i) {
            double rs = 0.0, cs = 0.0;
            for (int j = 0; j < n; ++j) {
                if (w(i, j) < 0.0) {
                    rep.ok = false;
                    rep.round = static_cast<int>(t);
                    rep.message = "negative weight at round " + std::to_string(t);
                    return rep;
                }
                rs += w(i, j);
                cs += w(j, i);
            }
            if (std::fabs(rs - 1.0) > tol || std::fabs(cs - 1.0) > tol) {
                rep.ok = false;
                rep.round = static_cast<int>(t);
                rep.message = "row/column sum off by more than 1e-12 at round " + std::to_string(t);
                return rep;
            }
        }
        for (int i = 0; i < n; ++i) {
            if (w(i, i) < seq.weight_floor - tol) {
                rep.ok = false;
                rep.round = static_cast<int>(t);
                rep.message = "diagonal below weight floor at round " + std::to_string(t);
                return rep;
            }
            for (int j = 0; j < n; ++j) {
                if (i != j && w(i, j) > 0.0 && w(i, j) < seq.weight_floor - tol) {
                    rep.ok = false;
                    rep.round = static_cast<int>(t);
                    rep.message = "positive weight below floor at round " + std::to_string(t);
                    return rep;
                }
            }
        }
    }
    const int rounds = static_cast<int>(seq.weights.size());
    const int window = std::max(1, seq.window);
    auto union_connected = [&](int start, int len) {
        Mat adj(n, n, 0.0);
        for (int t = start; t < start + len; ++t)
            for (const Edge& e : seq.rounds[static_cast<size_t>(t)]) adj(e.to, e.from) = 1.0;
        return detail::strongly_connected(adj);
    };
    if (rounds < window) {
        if (!union_connected(0, rounds)) {
            rep.ok = false;
            rep.round = 0;
            rep.message = "union over the whole (short) sequence is not strongly connected";
        }
        return rep;
    }
    for (int start = 0; start + window <= rounds; ++start) {
        if (!union_connected(start, window)) {
            rep.ok = false;
            rep.round = start;
            rep.message = "window starting at round " + std::to_string(start) + " is not jointly strongly connected";
            return rep;
        }
    }
    return rep;
}

// Consensus mixing of the dual iterates: result_i = sum_j [W]_{ij} * q_j.
inline std::vector<Vec> mix_duals(const Mat& w, const std::vector<Vec>& duals) {
    const int n = w.rows;
    if (w.cols != n || static_cast<int>(duals.size()) != n)
        throw std::invalid_argument("mix_duals: dimension mismatch");
    const size_t m = duals.empty() ? 0 : duals[0].size();
    for (const Vec& q : duals)
        if (q.size() != m) throw std::invalid_argument("mix_duals: ragged dual vectors");
    std::vector<Vec> out(static_cast<size_t>(n), Vec(m, 0.0));
    for (int i = 0; i < n; ++i) {
        Vec& acc = out[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double wij = w(i, j);
            if (wij == 0.0) continue;
            const Vec& qj = duals[static_cast<size_t>(j)];
            for (size_t k = 0; k < m; ++k) acc[k] += wij * qj[k];
        }
    }
    return out;
}

// ------------------------------------------------------------- serialization
//
// Line-oriented text format:
//   graphs v1
//   n <agents> rounds <count> window <w>
//   round <t>          (t = 1..count)
//   <i> <j>            (one directed edge per line, 0-based agents)
// Weights are rebuilt from the edges on load.

inline void save_graph_sequence(const CommGraphSequence& seq, std::ostream& os) {
    os << "graphs v1\n";
    os << "n " << seq.n << " rounds " << seq.rounds.size() << " window " << seq.window << "\n";
    for (size_t t = 0; t < seq.rounds.size(); ++t) {
        os << "round " << (t + 1) << "\n";
        for (const Edge& e : seq.rounds[t]) os << e.from << " " << e.to << "\n";
    }
}

struct GraphParseError : std::runtime_error {
    explicit GraphParseError(int line, const std::string& what)
        : std::runtime_error("graph file line " + std::to_string(line) + ": " + what) {}
};

inline CommGraphSequence load_graph_sequence(std::istream& is) {
    CommGraphSequence seq;
    std::string line;
    int lineno = 0;
    auto next_line = [&](bool required) {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty()) return true;
        }
        if (required) throw GraphParseError(lineno, "unexpected end of file");
        return false;
    };
    next_line(true);
    if (line != "graphs v1") throw GraphParseError(lineno, "bad header, expected 'graphs v1'");
    next_line(true);
    int rounds = 0;
    {
        std::istringstream ss(line);
        std::string kn, kr, kw;
        if (!(ss >> kn >> seq.n >> kr >> rounds >> kw >> seq.window) || kn != "n" || kr != "rounds" || kw != "window")
            throw GraphParseError(lineno, "bad size line, expected 'n <n> rounds <r> window <w>'");
    }
    if (seq.n < 1 || rounds < 0 || seq.window < 1) throw GraphParseError(lineno, "invalid sizes");
    seq.weight_floor = 1.0 / seq.n;
    seq.rounds.resize(static_cast<size_t>(rounds));
    int current = -1;
    while (next_line(false)) {
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "round") {
            int t = 0;
            if (!(ss >> t) || t < 1 || t > rounds) throw GraphParseError(lineno, "bad round index");
            if (t != current + 2) throw GraphParseError(lineno, "rounds out of order");
            current = t - 1;
        } else {
            if (current < 0) throw GraphParseError(lineno, "edge before any 'round' line");
            Edge e;
            std::istringstream es(line);
            if (!(es >> e.from >> e.to)) throw GraphParseError(lineno, "bad edge line");
            if (e.from < 0 || e.from >= seq.n || e.to < 0 || e.to >= seq.n)
                throw GraphParseError(lineno, "edge endpoint out of range");
            seq.rounds[static_cast<size_t>(current)].push_back(e);
        }
    }
    if (current + 1 != rounds) throw GraphParseError(lineno, "fewer rounds than declared");
    seq.weights.resize(static_cast<size_t>(rounds));
    for (int t = 0; t < rounds; ++t)
        seq.weights[static_cast<size_t>(t)] = build_weights(seq.rounds[static_cast<size_t>(t)], seq.n);
    return seq;
}

inline void save_graph_sequence(const CommGraphSequence& seq, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_graph_sequence(seq, f);
    if (!f.good()) throw std::runtime_error("write to '" + path + "' failed");
}

inline CommGraphSequence load_graph_sequence(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return load_graph_sequence(f);
}

}  // namespace dopd
