#pragma once

// Deterministic random sources. std::mt19937_64 has a fully specified output
// sequence, but the standard <random> distributions do not, so the uniform
// draws are implemented here by hand. Same seed => bit-identical streams on
// every platform.

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dopd {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent sub-seed for a named stream (instance data, graphs,
// sampling, ...) so components never share or reorder each other's draws.
inline uint64_t substream_seed(uint64_t seed, uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1): top 53 bits of the generator output.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on {lo, ..., hi}, inclusive, via unbiased rejection.
    long long uniform_int(long long lo, long long hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<long long>(eng_());  // full 64-bit range
        uint64_t threshold = (-range) % range;                  // 2^64 mod range
        for (;;) {
            uint64_t v = eng_();
            if (v >= threshold) return lo + static_cast<long long>(v % range);
        }
    }

    // Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(uniform_int(0, i));
            std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
        }
        return p;
    }

    // Uniform point on the probability simplex via sorted uniform gaps.
    std::vector<double> simplex_point(int k) {
        std::vector<double> u(static_cast<size_t>(k - 1));
        for (auto& v : u) v = uniform();
        std::sort(u.begin(), u.end());
        std::vector<double> w(static_cast<size_t>(k));
        double prev = 0.0;
        for (int i = 0; i + 1 < k; ++i) {
            w[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] - prev;
            prev = u[static_cast<size_t>(i)];
        }
        w[static_cast<size_t>(k - 1)] = 1.0 - prev;
        return w;
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace dopd
