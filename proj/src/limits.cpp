#include "cechlab/limits.hpp"

#include <cmath>

#include "cechlab/cech.hpp"
#include "cechlab/rng.hpp"

namespace cechlab {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

LimitEstimate a_j_constant_mc(int n_dim, int j, double r, long mc_samples, std::uint64_t seed) {
    if (n_dim < 1 || j < 1) throw std::invalid_argument("a_j_constant: need N >= 1 and j >= 1");
    if (!(r > 0)) throw std::invalid_argument("a_j_constant: r must be positive");
    if (mc_samples < 1000)
        throw insufficient_samples_error("a_j_constant: Monte Carlo path needs >= 1000 samples");

    const double ball2_vol = unit_ball_volume(n_dim) * std::pow(2.0, n_dim);
    const double scale = std::pow(ball2_vol, j) * std::pow(r, n_dim * j) / factorial(j + 1);

    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n_dim), static_cast<std::uint64_t>(j),
                               static_cast<std::uint64_t>(mc_samples)}));
    // Configuration buffer: the origin plus j points of B(0, 2).
    std::vector<double> config(static_cast<std::size_t>(j + 1) * n_dim, 0.0);
    long hits = 0;
    for (long s = 0; s < mc_samples; ++s) {
        for (int p = 1; p <= j; ++p) {
            double* x = config.data() + static_cast<std::size_t>(p) * n_dim;
            for (;;) {
                double norm2 = 0.0;
                for (int a = 0; a < n_dim; ++a) {
                    x[a] = rng.next_in(-2.0, 2.0);
                    norm2 += x[a] * x[a];
                }
                if (norm2 <= 4.0) break;
            }
        }
        if (miniball_radius(config, n_dim) <= 1.0) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(mc_samples);
    const double sd = std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)));
    LimitEstimate est;
    est.value = scale * p_hat;
    est.stderr_ = scale * sd / std::sqrt(static_cast<double>(mc_samples));
    est.samples = mc_samples;
    est.method = "monte-carlo";
    return est;
}

LimitEstimate a_j_constant(int n_dim, int j, double r, long mc_samples, std::uint64_t seed) {
    if (n_dim < 1 || j < 1) throw std::invalid_argument("a_j_constant: need N >= 1 and j >= 1");
    if (!(r > 0)) throw std::invalid_argument("a_j_constant: r must be positive");
    if (j == 1) {
        // int h_1(0,x) dx = vol(B(0,2)) = 2^N w_N, times r^N / 2.
        LimitEstimate est;
        est.value = std::pow(2.0, n_dim - 1) * unit_ball_volume(n_dim) * std::pow(r, n_dim);
        est.method = "closed-form";
        return est;
    }
    return a_j_constant_mc(n_dim, j, r, mc_samples, seed);
}

double s_hat_limit(int n_dim, int j, double lambda, double r) {
    if (lambda < 0) throw std::invalid_argument("s_hat_limit: lambda must be nonnegative");
    if (lambda == 0) return 0.0;
    return a_j_constant(n_dim, j, r).value * std::pow(lambda, j + 1);
}

double s_hat_limit(const LimitEstimate& a_j, int j, double lambda) {
    if (lambda < 0) throw std::invalid_argument("s_hat_limit: lambda must be nonnegative");
    return a_j.value * std::pow(lambda, j + 1);
}

double euler_limit(int n_dim, double r) {
    if (!(r > 0)) throw std::invalid_argument("euler_limit: r must be positive");
    switch (n_dim) {
        case 2: {
            double a = M_PI * r * r;
            return (1.0 - a) * std::exp(-a);
        }
        case 3: {
            double r3 = r * r * r;
            double poly = std::pow(M_PI, 4) * r3 * r3 / 6.0 - 4.0 * M_PI * r3 + 1.0;
            return poly * std::exp(-4.0 * M_PI * r3 / 3.0);
        }
        default:
            throw unsupported_dimension_error("euler_limit: closed form known only for N = 2, 3");
    }
}

double beta0_limit_1d(double lambda, double r) {
    if (lambda < 0 || r < 0) throw std::invalid_argument("beta0_limit_1d: negative argument");
    return lambda * std::exp(-2.0 * lambda * r);
}

ScalingImage scaling_map(double lambda, double r, double theta, int m) {
    if (!(theta > 0)) throw std::invalid_argument("scaling_map: theta must be positive");
    if (m < 1) throw std::invalid_argument("scaling_map: m must be positive");
    return {lambda * theta, r * std::pow(theta, -1.0 / m), 1.0 / theta};
}

double decay_envelope(int m, int k, double r, double c) {
    if (m < 1 || k < 0 || k > m - 1)
        throw std::invalid_argument("decay_envelope: need 0 <= k <= m-1");
    if (!(r > 0) || !(c > 0)) throw std::invalid_argument("decay_envelope: r, c must be positive");
    const double t = unit_ball_volume(m) * r;
    return c * std::pow(t, m * k) * std::exp(-std::pow(t, m));
}

double manifold_limit_integral(const ChartAtlas& atlas, const std::function<double(double)>& g,
                               int grid_per_axis) {
    if (!g) throw std::invalid_argument("manifold_limit_integral: null integrand");
    auto eval = [&](int grid) {
        double total = 0.0;
        for (std::size_t i = 0; i < atlas.piece_count(); ++i)
            total += quadrature_over_piece(
                atlas.piece(i),
                [&](std::span<const double>, std::span<const double> z, double dphi) {
                    return g(atlas.kappa(z)) * dphi;
                },
                grid);
        return total;
    };
    const double fine = eval(grid_per_axis);
    const double coarse = eval(std::max(2, grid_per_axis / 2));
    if (std::abs(fine - coarse) > tolerances().quadrature_rel * std::max(1.0, std::abs(fine)))
        throw resolution_warning_error("manifold_limit_integral: quadrature did not converge between grids");
    return fine;
}

}  // namespace cechlab
