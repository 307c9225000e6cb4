#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

// Portable sampling on top of std::mt19937_64. The engine's output sequence
// is fully specified by the standard, and none of the std::*_distribution
// adaptors are used (their algorithms are implementation-defined), so every
// draw here is bit-reproducible across platforms and standard libraries.

namespace ercav {

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

// Knuth's product-of-uniforms method; valid while exp(-mean) is representable.
inline std::uint64_t poisson_knuth(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0)
        return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform01(rng);
    } while (p > limit);
    return k - 1;
}

}  // namespace detail

/// Poisson sample. Large means are split into chunks of 32 (Poisson sums are
/// Poisson) so the Knuth threshold exp(-mean) stays far from underflow.
inline std::uint64_t poisson_sample(std::mt19937_64& rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::domain_error("poisson mean must be finite and nonnegative");
    constexpr double kChunk = 32.0;
    std::uint64_t total = 0;
    while (mean > kChunk) {
        total += detail::poisson_knuth(rng, kChunk);
        mean -= kChunk;
    }
    total += detail::poisson_knuth(rng, mean);
    return total;
}

/// Standard normal via Box-Muller. Always consumes exactly two engine draws;
/// the sine partner is discarded to keep the draw count deterministic.
inline double normal01(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng); // (0, 1], keeps log finite
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ercav
