#pragma once

#include <cstdint>
#include <random>

namespace qdefense {

/// Deterministic random stream. The generator is the standard-specified
/// mt19937_64, and both mappings below are fixed here so that identical seeds
/// reproduce identical streams across platforms and implementations:
///   uniform01():       (next() >> 11) * 2^-53, in [0,1)
///   uniform_below(n):  rejection-sampled next() % n (unbiased)
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n); n >= 1. Draws above the largest multiple
    /// of n below 2^64 are rejected to keep the result unbiased.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t max = ~std::uint64_t{0};
        const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
        const std::uint64_t limit = max - rem;        // inclusive acceptance bound
        std::uint64_t x;
        do {
            x = next();
        } while (x > limit);
        return x % n;
    }

  private:
    std::mt19937_64 engine_;
};

/// SplitMix64 mixer; used to derive decorrelated seeds (e.g. one per sweep row).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace qdefense
