#include "switchsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace switchsim {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64: advance by the golden-ratio increment, then finalize.
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform01() {
    // Top 53 bits of the 64-bit output; exact dyadic rational in [0,1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::int64_t Rng::poisson_knuth(double mean) {
    double limit = std::exp(-mean);
    double prod = uniform01();
    std::int64_t k = 0;
    while (prod > limit) {
        prod *= uniform01();
        ++k;
    }
    return k;
}

std::int64_t Rng::poisson_ptrs(double mean) {
    // Hoermann's PTRS transformed rejection, valid for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform01() - 0.5;
        double v = uniform01();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = k * log_mean - mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::int64_t>(k);
    }
}

std::int64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_knuth(mean);
    return poisson_ptrs(mean);
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must be in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    // Mirror so the Bernoulli probability is at most 1/2.
    if (p > 0.5) return n - binomial(n, 1.0 - p);

    double np = static_cast<double>(n) * p;
    if (p <= 1e-4) {
        // Rare-event regime: Poisson limit, clamped to the support.
        return std::min<std::int64_t>(n, poisson(np));
    }
    double var = np * (1.0 - p);
    if (var >= 100.0) {
        // Gaussian regime; absolute error of the approximation is orders of
        // magnitude below one standard deviation here.
        double x = np + std::sqrt(var) * normal();
        auto k = static_cast<std::int64_t>(std::llround(x));
        return std::clamp<std::int64_t>(k, 0, n);
    }
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < n; ++i)
        if (uniform01() < p) ++count;
    return count;
}

std::array<std::int64_t, 4> Rng::multinomial4(std::int64_t n, std::array<double, 4> p) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw std::invalid_argument("multinomial4: negative probability");
        total += x;
    }
    if (total > 1.0 + 1e-9) throw std::invalid_argument("multinomial4: probabilities exceed 1");

    // Draw categories in increasing probability order via conditional
    // binomials; the rare categories get exact small-count sampling instead
    // of riding on a normal tail.
    std::array<int, 4> order = {0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });

    std::array<std::int64_t, 4> out = {0, 0, 0, 0};
    std::int64_t remaining = n;
    double mass = 1.0;
    for (int idx : order) {
        if (remaining == 0) break;
        double cond = (mass > 0.0) ? std::min(1.0, p[idx] / mass) : 0.0;
        std::int64_t k = binomial(remaining, cond);
        out[idx] = k;
        remaining -= k;
        mass -= p[idx];
    }
    // Trials left by a sub-unit probability total belong to the implicit
    // remainder category; merging it into category 3 keeps the counts a
    // proper multinomial with p3 replaced by p3 + (1 - total).
    out[3] += remaining;
    return out;
}

} // namespace switchsim
