#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "cechlab/geometry.hpp"

namespace cechlab {

struct LimitEstimate {
    double value = 0.0;
    double stderr_ = 0.0;   // 0 for closed forms
    long samples = 0;       // 0 for closed forms
    std::string method;     // "closed-form" or "monte-carlo"
};

// A_j^{(N)}(r): the constant governing the expected j-simplex density of a
// unit-intensity homogeneous process. j = 1 has the closed form
// 2^{N-1} w_N r^N; higher j are Monte Carlo estimates of
// r^{Nj}/(j+1)! * int h_j(0,x) dx with h_j evaluated through the miniball
// radius at scale 1.
LimitEstimate a_j_constant(int n_dim, int j, double r, long mc_samples = 200000,
                           std::uint64_t seed = 0x414a21ULL);

// Forced Monte Carlo path (also for j = 1, where the closed form is the
// cross-check).
LimitEstimate a_j_constant_mc(int n_dim, int j, double r, long mc_samples, std::uint64_t seed);

// S-hat limit A_j^{(N)}(r) * lambda^{j+1}. The overload without a cached
// estimate uses the closed form for j = 1 and default Monte Carlo otherwise.
double s_hat_limit(int n_dim, int j, double lambda, double r);
double s_hat_limit(const LimitEstimate& a_j, int j, double lambda);

// Closed-form limits of chi/n for the uniform thermodynamic experiment:
// (1 - pi r^2) e^{-pi r^2} in dimension 2 and
// (pi^4 r^6 / 6 - 4 pi r^3 + 1) e^{-4 pi r^3 / 3} in dimension 3.
double euler_limit(int n_dim, double r);

// Components per unit length of a 1-D unit-rate-scaled homogeneous process
// where points connect at gap <= 2r: lambda * exp(-2 lambda r).
double beta0_limit_1d(double lambda, double r);

struct ScalingImage {
    double lambda = 0.0;
    double r = 0.0;
    double factor = 0.0;  // beta-hat(lambda, r) = factor * beta-hat(lambda', r')
};

// The scaling action (lambda, r) -> (lambda theta, r theta^{-1/m}) with
// prefactor 1/theta.
ScalingImage scaling_map(double lambda, double r, double theta, int m);

// Upper-bound shape c (w_m r)^{mk} exp(-(w_m r)^m) for beta-hat_k^{(m)}(1, r);
// the constant c is caller-supplied.
double decay_envelope(int m, int k, double r, double c);

// sum_i int_{C_i} g(kappa(phi_i(x))) D_phi_i(x) dx by midpoint quadrature;
// raises resolution_warning_error when the half-grid value disagrees beyond
// the quadrature tolerance.
double manifold_limit_integral(const ChartAtlas& atlas, const std::function<double(double)>& g,
                               int grid_per_axis = 256);

}  // namespace cechlab
