#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cechlab/cech.hpp"
#include "cechlab/homology.hpp"
#include "cechlab/limits.hpp"
#include "cechlab/sampling.hpp"

namespace cechlab {

// Thermodynamic-regime experiment: for each r in the grid the complex is
// built at radius r_n = r * n^{-1/dim}, where dim is the ambient dimension in
// the Euclidean setting and the intrinsic dimension in the manifold setting.
struct ExperimentConfig {
    enum class Setting { euclidean, manifold };

    Setting setting = Setting::euclidean;
    std::optional<DensitySpec> density;   // euclidean
    std::optional<MetricSpec> metric;     // euclidean; defaults to Euclidean on the density dim
    std::shared_ptr<const ChartAtlas> atlas;  // manifold
    ProcessTag process = ProcessTag::binomial;

    long n = 10000;
    std::vector<double> r_grid;
    std::vector<long> n_list;  // convergence / coupling studies
    int trials = 20;
    int k_max = 1;
    bool want_chi = false;  // builds to the full natural dimension
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    std::size_t simplex_cap = 0;  // 0 = default cap

    // Scaling dimension for r_n.
    int regime_dim() const;
    void validate() const;

    static ExperimentConfig euclidean_uniform(int n_dim, long n, std::vector<double> r_grid,
                                              int trials, int k_max, std::uint64_t seed);
    static ExperimentConfig manifold(std::shared_ptr<const ChartAtlas> atlas, long n,
                                     std::vector<double> r_grid, int trials, int k_max,
                                     std::uint64_t seed);
};

struct TrialStats {
    long n_points = 0;  // actual cloud size (N_n for poissonized processes)
    std::vector<double> beta_over_n;  // k = 0..k_max
    std::vector<double> s_over_n;     // j = 0..k_max+1
    double chi_over_n = 0.0;
    bool has_chi = false;
};

struct ResultRecord {
    double r = 0.0;
    long n = 0;
    std::uint64_t seed = 0;  // master seed the trial streams derive from
    std::vector<TrialStats> trials;
    std::vector<MeanStderr> beta_stats;  // per k
    std::vector<MeanStderr> s_stats;     // per j
    MeanStderr chi_stats;
    double wall_seconds = 0.0;
};

// One record per r in the grid; beta_k/n, S_j/n and (optionally) chi/n per
// trial with aggregates. Deterministic in the master seed for any thread
// count.
std::vector<ResultRecord> run_lln_curve(const ExperimentConfig& config);

// One record per n in n_list at the first grid radius; dispersion trends
// across n exhibit the concentration half of the strong law.
std::vector<ResultRecord> run_convergence(const ExperimentConfig& config);

// Estimates beta-hat_k^{(N)}(lambda, r) for k = 0..k_max from homogeneous
// processes on a volume-L window: the returned values are beta_k / L
// aggregates. Requires lambda * L >= 10 unless lambda == 0.
std::vector<LimitEstimate> estimate_beta_hat(int n_dim, double lambda, double r, double big_l,
                                             int trials, std::uint64_t seed, int k_max = 1,
                                             int threads = 0);

struct CouplingTrial {
    long n_used = 0;                // Poissonized count N_n
    std::vector<double> gap_over_n; // |S_j(binomial) - S_j(poissonized)|/n, j = 0..k_max+1
};

struct CouplingRecord {
    long n = 0;
    std::vector<CouplingTrial> trials;
    std::vector<MeanStderr> gap_stats;  // per j
};

// Simplex-count gap between the coupled binomial and Poissonized clouds
// (same seed, shared point stream) per n in n_list.
std::vector<CouplingRecord> run_coupling_gap(const ExperimentConfig& config);

// Mean S_j/n across trials at the first grid radius, as a LimitEstimate to
// compare against the S-hat integral targets.
LimitEstimate estimate_expected_simplex_limit(const ExperimentConfig& config, int j);

}  // namespace cechlab
