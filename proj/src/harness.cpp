#include "cechlab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cechlab/rng.hpp"

namespace cechlab {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs tasks 0..count-1 across workers; any exception is rethrown on the
// caller thread. Task results must be written into preassigned slots so the
// outcome is independent of scheduling.
void parallel_for(int threads, std::size_t count, const std::function<void(std::size_t)>& task) {
    threads = std::min<std::size_t>(resolve_threads(threads), count == 0 ? 1 : count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

PointCloud sample_for_config(const ExperimentConfig& config, long n, std::uint64_t seed,
                             long* n_used) {
    if (config.setting == ExperimentConfig::Setting::euclidean) {
        if (config.process == ProcessTag::poissonized) {
            auto pc = sample_poissonized(*config.density, n, seed);
            if (n_used) *n_used = pc.n_used;
            return std::move(pc.cloud);
        }
        auto cloud = sample_binomial(*config.density, n, seed);
        if (n_used) *n_used = static_cast<long>(cloud.size());
        return cloud;
    }
    long used = 0;
    auto cloud = sample_manifold(*config.atlas, n,
                                 seed, config.process == ProcessTag::poissonized, &used);
    if (n_used) *n_used = used;
    return cloud;
}

MetricSpec working_metric(const ExperimentConfig& config) {
    if (config.setting == ExperimentConfig::Setting::euclidean) {
        if (config.metric) return *config.metric;
        return MetricSpec::euclidean(config.density->dim());
    }
    // Manifold clouds are embedded points; the complex lives in ambient space.
    return MetricSpec::euclidean(config.atlas->ambient_dim());
}

TrialStats run_single_trial(const ExperimentConfig& config, const MetricSpec& metric, double r,
                            long n, std::uint64_t trial_seed) {
    TrialStats stats;
    PointCloud cloud = sample_for_config(config, n, trial_seed, &stats.n_points);
    const double r_n = r * std::pow(static_cast<double>(n), -1.0 / config.regime_dim());
    const int build_dim =
        config.want_chi ? std::numeric_limits<int>::max() : config.k_max + 1;
    SimplicialComplex cx = cech_complex(cloud, r_n, metric, build_dim,
                                        config.simplex_cap ? config.simplex_cap : 0);

    const double dn = static_cast<double>(n);
    auto counts = simplex_counts(cx);
    stats.s_over_n.assign(static_cast<std::size_t>(config.k_max) + 2, 0.0);
    for (std::size_t j = 0; j < stats.s_over_n.size(); ++j)
        stats.s_over_n[j] = (j < counts.size() ? static_cast<double>(counts[j]) : 0.0) / dn;

    BettiVector bv = betti_numbers(cx, config.k_max);
    stats.beta_over_n.resize(bv.size());
    for (std::size_t k = 0; k < bv.size(); ++k)
        stats.beta_over_n[k] = static_cast<double>(bv.values[k]) / dn;

    if (config.want_chi) {
        stats.chi_over_n = static_cast<double>(euler_characteristic(cx)) / dn;
        stats.has_chi = true;
    }
    return stats;
}

void aggregate(ResultRecord& rec, int k_max) {
    const std::size_t t = rec.trials.size();
    std::vector<double> buf(t);
    rec.beta_stats.resize(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        for (std::size_t i = 0; i < t; ++i) buf[i] = rec.trials[i].beta_over_n[k];
        rec.beta_stats[k] = mean_stderr(buf);
    }
    rec.s_stats.resize(static_cast<std::size_t>(k_max) + 2);
    for (int j = 0; j <= k_max + 1; ++j) {
        for (std::size_t i = 0; i < t; ++i) buf[i] = rec.trials[i].s_over_n[j];
        rec.s_stats[j] = mean_stderr(buf);
    }
    if (!rec.trials.empty() && rec.trials.front().has_chi) {
        for (std::size_t i = 0; i < t; ++i) buf[i] = rec.trials[i].chi_over_n;
        rec.chi_stats = mean_stderr(buf);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

int ExperimentConfig::regime_dim() const {
    return setting == Setting::euclidean ? density->dim() : atlas->intrinsic_dim();
}

void ExperimentConfig::validate() const {
    if (setting == Setting::euclidean) {
        if (!density) throw std::invalid_argument("experiment: euclidean setting needs a density");
        if (metric && metric->point_dim() != density->dim())
            throw std::invalid_argument("experiment: metric/density dimension mismatch");
    } else {
        if (!atlas) throw std::invalid_argument("experiment: manifold setting needs an atlas");
    }
    if (n < 1) throw std::invalid_argument("experiment: n must be positive");
    if (trials < 1) throw std::invalid_argument("experiment: trials must be positive");
    if (k_max < 0) throw std::invalid_argument("experiment: k_max must be nonnegative");
    if (r_grid.empty()) throw std::invalid_argument("experiment: empty r grid");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0)) throw std::invalid_argument("experiment: grid radii must be positive");
        if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
            throw std::invalid_argument("experiment: r grid must be strictly increasing");
    }
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("experiment: n list must be strictly increasing");
}

ExperimentConfig ExperimentConfig::euclidean_uniform(int n_dim, long n, std::vector<double> r_grid,
                                                     int trials, int k_max, std::uint64_t seed) {
    ExperimentConfig c;
    c.setting = Setting::euclidean;
    c.density = DensitySpec::uniform_box(Box::unit(n_dim));
    c.n = n;
    c.r_grid = std::move(r_grid);
    c.trials = trials;
    c.k_max = k_max;
    c.master_seed = seed;
    return c;
}

ExperimentConfig ExperimentConfig::manifold(std::shared_ptr<const ChartAtlas> atlas, long n,
                                            std::vector<double> r_grid, int trials, int k_max,
                                            std::uint64_t seed) {
    ExperimentConfig c;
    c.setting = Setting::manifold;
    c.atlas = std::move(atlas);
    c.n = n;
    c.r_grid = std::move(r_grid);
    c.trials = trials;
    c.k_max = k_max;
    c.master_seed = seed;
    return c;
}

// ---------------------------------------------------------------------------
// Runners

std::vector<ResultRecord> run_lln_curve(const ExperimentConfig& config) {
    config.validate();
    const MetricSpec metric = working_metric(config);
    std::vector<ResultRecord> records(config.r_grid.size());
    for (std::size_t ri = 0; ri < config.r_grid.size(); ++ri) {
        ResultRecord& rec = records[ri];
        rec.r = config.r_grid[ri];
        rec.n = config.n;
        rec.seed = config.master_seed;
        rec.trials.resize(config.trials);
        auto start = std::chrono::steady_clock::now();
        parallel_for(config.threads, static_cast<std::size_t>(config.trials), [&](std::size_t t) {
            const std::uint64_t seed = derive_seed(config.master_seed, {ri, t});
            rec.trials[t] = run_single_trial(config, metric, rec.r, config.n, seed);
        });
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        aggregate(rec, config.k_max);
    }
    return records;
}

std::vector<ResultRecord> run_convergence(const ExperimentConfig& config) {
    config.validate();
    if (config.n_list.empty())
        throw std::invalid_argument("run_convergence: config needs an increasing n list");
    const MetricSpec metric = working_metric(config);
    const double r = config.r_grid.front();
    std::vector<ResultRecord> records(config.n_list.size());
    for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
        ResultRecord& rec = records[ni];
        rec.r = r;
        rec.n = config.n_list[ni];
        rec.seed = config.master_seed;
        rec.trials.resize(config.trials);
        auto start = std::chrono::steady_clock::now();
        parallel_for(config.threads, static_cast<std::size_t>(config.trials), [&](std::size_t t) {
            const std::uint64_t seed = derive_seed(config.master_seed, {0x6e, ni, t});
            rec.trials[t] = run_single_trial(config, metric, r, rec.n, seed);
        });
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        aggregate(rec, config.k_max);
    }
    return records;
}

std::vector<LimitEstimate> estimate_beta_hat(int n_dim, double lambda, double r, double big_l,
                                             int trials, std::uint64_t seed, int k_max,
                                             int threads) {
    if (n_dim < 1) throw std::invalid_argument("estimate_beta_hat: dimension must be positive");
    if (lambda < 0) throw std::invalid_argument("estimate_beta_hat: lambda must be nonnegative");
    if (!(big_l > 0)) throw std::invalid_argument("estimate_beta_hat: window volume must be positive");
    if (lambda > 0 && lambda * big_l < 10)
        throw std::invalid_argument("estimate_beta_hat: lambda * L must be at least 10");
    if (trials < 1) throw std::invalid_argument("estimate_beta_hat: trials must be positive");

    const Box window = Box::centered_cube(n_dim, big_l);
    const MetricSpec metric = MetricSpec::euclidean(n_dim);
    std::vector<std::vector<double>> beta_over_l(static_cast<std::size_t>(trials));
    parallel_for(threads, static_cast<std::size_t>(trials), [&](std::size_t t) {
        PointCloud cloud = sample_homogeneous(lambda, window, derive_seed(seed, {0xb7, t}));
        SimplicialComplex cx = cech_complex(cloud, r, metric, k_max + 1);
        BettiVector bv = betti_numbers(cx, k_max);
        auto& row = beta_over_l[t];
        row.resize(bv.size());
        for (std::size_t k = 0; k < bv.size(); ++k)
            row[k] = static_cast<double>(bv.values[k]) / big_l;
    });

    std::vector<LimitEstimate> out(static_cast<std::size_t>(k_max) + 1);
    std::vector<double> buf(static_cast<std::size_t>(trials));
    for (int k = 0; k <= k_max; ++k) {
        for (int t = 0; t < trials; ++t) buf[t] = beta_over_l[t][k];
        auto ms = mean_stderr(buf);
        out[k] = {ms.mean, ms.stderr_, trials, "monte-carlo"};
    }
    return out;
}

std::vector<CouplingRecord> run_coupling_gap(const ExperimentConfig& config) {
    config.validate();
    if (config.setting != ExperimentConfig::Setting::euclidean)
        throw std::invalid_argument("run_coupling_gap: euclidean setting only");
    if (config.n_list.empty())
        throw std::invalid_argument("run_coupling_gap: config needs an increasing n list");
    const MetricSpec metric = working_metric(config);
    const double r = config.r_grid.front();
    const int j_top = config.k_max + 1;

    std::vector<CouplingRecord> records(config.n_list.size());
    for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
        CouplingRecord& rec = records[ni];
        rec.n = config.n_list[ni];
        rec.trials.resize(config.trials);
        parallel_for(config.threads, static_cast<std::size_t>(config.trials), [&](std::size_t t) {
            const std::uint64_t seed = derive_seed(config.master_seed, {0xc0, ni, t});
            const long n = rec.n;
            const double r_n = r * std::pow(static_cast<double>(n), -1.0 / config.regime_dim());
            PointCloud binomial = sample_binomial(*config.density, n, seed);
            PoissonizedCloud poissonized = sample_poissonized(*config.density, n, seed);

            auto counts_of = [&](const PointCloud& cloud) {
                SimplicialComplex cx = cech_complex(cloud, r_n, metric, j_top, config.simplex_cap);
                return simplex_counts(cx);
            };
            auto cb = counts_of(binomial);
            auto cp = counts_of(poissonized.cloud);
            CouplingTrial& trial = rec.trials[t];
            trial.n_used = poissonized.n_used;
            trial.gap_over_n.resize(static_cast<std::size_t>(j_top) + 1, 0.0);
            for (int j = 0; j <= j_top; ++j) {
                double sb = j < static_cast<int>(cb.size()) ? static_cast<double>(cb[j]) : 0.0;
                double sp = j < static_cast<int>(cp.size()) ? static_cast<double>(cp[j]) : 0.0;
                trial.gap_over_n[j] = std::abs(sb - sp) / static_cast<double>(n);
            }
        });
        rec.gap_stats.resize(static_cast<std::size_t>(j_top) + 1);
        std::vector<double> buf(rec.trials.size());
        for (int j = 0; j <= j_top; ++j) {
            for (std::size_t t = 0; t < rec.trials.size(); ++t) buf[t] = rec.trials[t].gap_over_n[j];
            rec.gap_stats[j] = mean_stderr(buf);
        }
    }
    return records;
}

LimitEstimate estimate_expected_simplex_limit(const ExperimentConfig& config, int j) {
    config.validate();
    if (j < 0 || j > config.k_max + 1)
        throw std::invalid_argument("estimate_expected_simplex_limit: j out of the recorded range");
    ExperimentConfig single = config;
    single.r_grid = {config.r_grid.front()};
    auto records = run_lln_curve(single);
    const auto& ms = records.front().s_stats[j];
    return {ms.mean, ms.stderr_, config.trials, "monte-carlo"};
}

}  // namespace cechlab
