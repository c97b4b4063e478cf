#include "cechlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cechlab {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master ^ 0x5851f42d4c957f2dULL);
    for (std::uint64_t idx : path) s = mix64(s + 0x9e3779b97f4a7c15ULL * (idx + 1));
    return s;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    // Rejection to avoid modulo bias.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

std::uint64_t Rng::next_poisson(double mean) {
    if (mean < 0 || !std::isfinite(mean)) throw std::invalid_argument("next_poisson: invalid mean");
    if (mean == 0) return 0;
    return mean < 30.0 ? poisson_inversion(mean) : poisson_ptrd(mean);
}

// Sequential search from k = 0; one uniform per draw.
std::uint64_t Rng::poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double cum = p;
    double u = next_double();
    std::uint64_t k = 0;
    while (u > cum) {
        ++k;
        p *= mean / static_cast<double>(k);
        cum += p;
        if (k > 2000) break;  // cum has saturated numerically
    }
    return k;
}

// PTRD: transformed rejection with squeeze (W. Hormann, 1993). Constants are
// the published ones; the uniform consumption order (U then V per round) is
// fixed by the determinism contract.
std::uint64_t Rng::poisson_ptrd(double mean) {
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        double u = next_double() - 0.5;
        double v = next_double();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = k * std::log(mean) - mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
}

}  // namespace cechlab
