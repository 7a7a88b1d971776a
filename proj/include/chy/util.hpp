#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace chy {

/// Deterministic pairwise-tree summation. All reductions in the library go
/// through this so that results are bit-reproducible regardless of how the
/// surrounding loops are scheduled.
double pairwise_sum(std::span<const double> x);

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(std::span<const double>(x));
}

/// Seeded counter-free PRNG (splitmix64 core). Kept deliberately independent
/// of std::uniform_real_distribution so that streams are stable across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer in [0, m).
    int uniform_int(int m) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(m)); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform01(), u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t state_;
};

inline double sup_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_norm(const std::vector<double>& x) {
    return sup_norm(std::span<const double>(x));
}

} // namespace chy
