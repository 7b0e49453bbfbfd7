#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace vidorder {

/// Deterministic random helpers built on std::mt19937_64, whose raw output
/// sequence is fully specified by the standard. The distribution shaping is
/// hand-rolled because std::*_distribution results are implementation-defined
/// and would break cross-toolchain reproducibility of sampled sets, trained
/// checkpoints, and exported CSVs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Unbiased integer in [0, n) via rejection sampling. n == 0 yields 0.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;  // multiple of n
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal deviate via Box-Muller. The sine partner is discarded
    /// so every call consumes exactly two raw draws (call-order stable).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace vidorder
