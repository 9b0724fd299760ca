#pragma once

#include <array>
#include <cstdint>
#include <cmath>

// Seeded, portable random number generation.
//
// Every stochastic choice in this library flows through the two generators
// below, so results are reproducible bit-for-bit across platforms and
// standard library implementations (std::uniform_real_distribution et al.
// are unspecified and vary between libstdc++/libc++/MSVC).
//
//   * SplitMix64 (Steele, Lea, Flood 2014): used for seed derivation and
//     stream splitting.
//   * xoshiro256** (Blackman, Vigna 2018): the draw generator, seeded from
//     SplitMix64 output.
//
// Stream-splitting rule: a run owns one 64-bit master seed. Subsystem seeds
// are derived as mix_seed(master, tag) with fixed tags (see config.hpp).
// Per-row bandwidth searches use row_seeds(seed, n): the i-th output of a
// SplitMix64 sequence started at `seed` seeds row i.

namespace adapsne {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// Derives an independent stream seed from a master seed and a small tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 sm(seed ^ (0xA0761D6478BD642FULL * (tag + 1)));
    return sm.next();
}

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : state_) word = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform double in [-1, 1).
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    /// Uniform integer in [0, n). Unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double gaussian() {
        // u1 in (0, 1] so log never sees zero
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace adapsne
