#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace switchsim {

/// Mix a base seed with a stream index into an independent 64-bit seed.
/// splitmix64 finalizer; consecutive indices give decorrelated streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Deterministic random source. All distribution transforms are implemented
/// here rather than with std:: distributions, whose algorithms vary across
/// standard libraries; identical seeds must give identical scan files on
/// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t base, std::uint64_t index) : engine_(mix_seed(base, index)) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Standard normal deviate (Box-Muller, both halves used).
    double normal();

    /// Poisson deviate with the given mean. Knuth multiplication below
    /// mean 10, PTRS transformed rejection above.
    std::int64_t poisson(double mean);

    /// Binomial deviate, exact for small n*p, normal approximation when the
    /// variance is large enough that the error is far below shot noise.
    std::int64_t binomial(std::int64_t n, double p);

    /// One draw of n trials over four outcome categories (probabilities sum
    /// to at most 1; the remainder, if any, is folded into the last). Uses
    /// sequential conditional binomials, smallest category first, so the
    /// rare outcomes are sampled exactly.
    std::array<std::int64_t, 4> multinomial4(std::int64_t n, std::array<double, 4> p);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;

    std::int64_t poisson_knuth(double mean);
    std::int64_t poisson_ptrs(double mean);
};

} // namespace switchsim
