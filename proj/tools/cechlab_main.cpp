// Command-line front end: sampling, complex construction, homology, and the
// experiment runners, with reproducible seeds and preset experiments.
//
// Exit codes: 0 success, 2 config/usage error, 3 resource cap, 4 failed
// --check band.

#include <CLI11.hpp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cechlab/io.hpp"
#include "cechlab/rng.hpp"

using namespace cechlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;
constexpr int kExitCheck = 4;

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Box parse_box(const std::string& text) {
    // "0,1x0,1" -> [0,1] x [0,1]
    std::vector<double> lo, hi;
    std::istringstream axes(text);
    std::string axis;
    while (std::getline(axes, axis, 'x')) {
        auto comma = axis.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("box: axis needs 'lo,hi'");
        lo.push_back(std::stod(axis.substr(0, comma)));
        hi.push_back(std::stod(axis.substr(comma + 1)));
    }
    return Box(std::move(lo), std::move(hi));
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
    // "2,0;0,1" -> rows separated by ';'
    std::vector<std::vector<double>> rows;
    std::istringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
        rows.emplace_back();
        std::istringstream cs(row);
        std::string cell;
        while (std::getline(cs, cell, ',')) rows.back().push_back(std::stod(cell));
    }
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw std::invalid_argument("matrix: must be square");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<long> parse_long_list(const std::string& text) {
    std::vector<long> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stol(tok));
    return out;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    return json::parse(in);
}

// Emits results to stdout or to <out>.csv/.json/.dat with the resolved
// config embedded, so a run can be reproduced from its own output.
void emit_results(const std::string& out_prefix, const std::string& setting,
                  const ExperimentConfig& config, const std::vector<ResultRecord>& records) {
    const std::string config_line = experiment_config_to_json(config).dump();
    if (out_prefix.empty()) {
        write_results_csv(std::cout, setting, records, config.trials, "config: " + config_line);
        return;
    }
    {
        auto f = open_output(out_prefix + ".csv");
        write_results_csv(f, setting, records, config.trials, "config: " + config_line);
    }
    {
        auto f = open_output(out_prefix + ".json");
        json j = results_to_json(setting, records);
        j["config"] = experiment_config_to_json(config);
        f << j.dump(2) << "\n";
    }
    {
        auto f = open_output(out_prefix + ".dat");
        f << "# config: " << config_line << "\n";
        write_gnuplot_table(f, records);
    }
    std::cout << "wrote " << out_prefix << ".csv, .json, .dat\n";
}

void apply_preset_lln(ExperimentConfig& config, const std::string& preset) {
    if (preset == "figure2-2d") {
        config = ExperimentConfig::euclidean_uniform(2, 10000, {0.3, 0.6, 1.0}, 20, 1, 101);
        config.want_chi = true;
    } else if (preset == "figure2-3d") {
        config = ExperimentConfig::euclidean_uniform(3, 10000, {0.3, 0.5}, 20, 1, 101);
        config.want_chi = true;
    } else if (preset == "circle-beta0") {
        config = ExperimentConfig::manifold(std::make_shared<ChartAtlas>(make_circle_atlas()),
                                            10000, {1.0}, 20, 1, 101);
    } else {
        throw std::invalid_argument("unknown lln preset '" + preset + "'");
    }
}

// Acceptance bands for the presets; throws CheckFailure with a diagnostic.
void check_lln(const ExperimentConfig& config, const std::string& preset,
               const std::vector<ResultRecord>& records) {
    std::ostringstream fail;
    if (preset == "figure2-2d" || preset == "figure2-3d") {
        const int dim = config.density->dim();
        const double floor = dim == 2 ? 0.02 : 0.03;
        for (const auto& rec : records) {
            const double target = euler_limit(dim, rec.r);
            const double band = std::max(floor, 4.0 * rec.chi_stats.stderr_);
            const double err = std::abs(rec.chi_stats.mean - target);
            std::cout << "check chi/n at r=" << rec.r << ": mean=" << rec.chi_stats.mean
                      << " target=" << target << " band=" << band << (err <= band ? " ok" : " FAIL")
                      << "\n";
            if (err > band) fail << "chi/n off target at r=" << rec.r << "; ";
        }
    } else if (preset == "circle-beta0") {
        const auto& rec = records.front();
        const double target = std::exp(-1.0 / M_PI);
        const double band = std::max(0.01, 4.0 * rec.beta_stats[0].stderr_);
        const double err = std::abs(rec.beta_stats[0].mean - target);
        std::cout << "check beta0/n: mean=" << rec.beta_stats[0].mean << " target=" << target
                  << " band=" << band << (err <= band ? " ok" : " FAIL") << "\n";
        if (err > band) fail << "beta0/n off target; ";
        if (rec.beta_stats[1].mean > 2e-4) fail << "beta1/n above 2e-4; ";
    }
    if (!fail.str().empty()) throw CheckFailure(fail.str());
}

int cmd_sample(const std::string& uniform_box, const std::string& manifold,
               const std::string& density_kind, int density_axis, double density_alpha, long n,
               std::uint64_t seed, const std::string& out_path, bool binary, bool poissonized) {
    PointCloud cloud;
    json config;
    config["subcommand"] = "sample";
    config["n"] = n;
    config["seed"] = seed;
    if (!uniform_box.empty()) {
        auto density = DensitySpec::uniform_box(parse_box(uniform_box));
        cloud = poissonized ? sample_poissonized(density, n, seed).cloud
                            : sample_binomial(density, n, seed);
        config["uniform_box"] = uniform_box;
    } else if (!manifold.empty()) {
        AtlasDensity density;
        if (density_kind == "tilted") {
            density.kind = AtlasDensity::Kind::tilted;
            density.axis = density_axis;
            density.alpha = density_alpha;
        }
        auto atlas = atlas_from_name(manifold, density);
        cloud = sample_manifold(atlas, n, seed, poissonized);
        config["manifold"] = manifold;
        config["density"] = density_kind;
    } else {
        throw std::invalid_argument("sample: need --uniform-box or --manifold");
    }
    config["process"] = to_string(cloud.tag());

    if (out_path.empty()) {
        write_cloud_csv(std::cout, cloud, config.dump());
    } else {
        auto f = open_output(out_path);
        if (binary)
            write_cloud_binary(f, cloud);
        else
            write_cloud_csv(f, cloud, config.dump());
    }
    return kExitOk;
}

int cmd_betti(const std::string& cloud_path, double r, const std::string& metric_kind,
              const std::string& weight_matrix, int k_max, bool full_dim, std::size_t simplex_cap) {
    std::ifstream in(cloud_path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read cloud file: " + cloud_path);
    char magic[4] = {};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    PointCloud cloud =
        std::memcmp(magic, "CLB1", 4) == 0 ? read_cloud_binary(in) : read_cloud_csv(in);
    if (cloud.empty()) {
        std::cerr << "warning: empty cloud, reporting zero Betti numbers\n";
        json out{{"betti", json::array({0})}, {"S", json::array({0})}, {"chi", 0}};
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    MetricSpec metric = metric_kind == "weighted"
                            ? MetricSpec::weighted_norm(parse_matrix(weight_matrix))
                            : MetricSpec::euclidean(cloud.dim());
    const int build_dim = full_dim ? std::numeric_limits<int>::max() : k_max + 1;
    SimplicialComplex cx = cech_complex(cloud, r, metric, build_dim, simplex_cap);
    BettiVector bv = betti_numbers(cx, k_max);
    auto counts = simplex_counts(cx);

    json out = betti_to_json(bv);
    out["S"] = counts;
    out["r"] = r;
    if (full_dim) out["chi"] = euler_characteristic(cx);
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_lln_command(ExperimentConfig config, const std::string& preset,
                    const std::string& out_prefix, bool check) {
    auto records = run_lln_curve(config);
    emit_results(out_prefix,
                 config.setting == ExperimentConfig::Setting::euclidean ? "euclidean" : "manifold",
                 config, records);
    if (check) {
        if (preset.empty()) throw std::invalid_argument("--check requires a preset");
        check_lln(config, preset, records);
        std::cout << "check passed\n";
    }
    return kExitOk;
}

int cmd_betahat(int n_dim, double lambda, double r, double big_l, int trials, std::uint64_t seed,
                int k_max, int threads, const std::string& out_path, bool scaling_check) {
    if (scaling_check) {
        // The scaling action sends (lambda, r) to (theta lambda, r theta^{-1/m})
        // with prefactor 1/theta; estimates on both sides must agree.
        const double theta = 4.0;
        auto base = estimate_beta_hat(n_dim, lambda, r, big_l, trials, seed, k_max, threads);
        auto image = scaling_map(lambda, r, theta, n_dim);
        auto scaled = estimate_beta_hat(n_dim, image.lambda, image.r, big_l, trials,
                                        derive_seed(seed, {0x5c}), k_max, threads);
        bool ok = true;
        for (int k = 0; k <= k_max; ++k) {
            const double lhs = base[k].value;
            const double rhs = image.factor * scaled[k].value;
            const double band = 3.0 * std::hypot(base[k].stderr_, image.factor * scaled[k].stderr_);
            const bool pass = std::abs(lhs - rhs) <= band;
            std::cout << "scaling check k=" << k << ": " << lhs << " vs " << rhs << " band=" << band
                      << (pass ? " ok" : " FAIL") << "\n";
            ok = ok && pass;
        }
        if (!ok) throw CheckFailure("scaling property violated beyond 3 combined stderr");
        return kExitOk;
    }

    auto estimates = estimate_beta_hat(n_dim, lambda, r, big_l, trials, seed, k_max, threads);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_output(out_path);
        out = &file;
    }
    *out << "# config: {\"subcommand\":\"betahat\",\"N\":" << n_dim << ",\"lambda\":" << lambda
         << ",\"r\":" << r << ",\"L\":" << big_l << ",\"trials\":" << trials << ",\"seed\":" << seed
         << ",\"k_max\":" << k_max << "}\n";
    write_limit_csv_header(*out);
    for (int k = 0; k <= k_max; ++k) write_limit_row(*out, n_dim, k, lambda, r, estimates[k]);
    return kExitOk;
}

int cmd_coupling(const std::string& n_list, double r, int dim, int trials, std::uint64_t seed,
                 int threads, const std::string& out_path, bool check) {
    ExperimentConfig config = ExperimentConfig::euclidean_uniform(dim, 1, {r}, trials, 1, seed);
    config.n_list = parse_long_list(n_list);
    config.threads = threads;
    auto records = run_coupling_gap(config);

    const std::string config_line = experiment_config_to_json(config).dump();
    if (out_path.empty()) {
        write_coupling_csv(std::cout, records, "config: " + config_line);
    } else {
        auto f = open_output(out_path);
        write_coupling_csv(f, records, "config: " + config_line);
    }
    if (check) {
        for (std::size_t i = 1; i < records.size(); ++i)
            if (!(records[i].gap_stats[1].mean < records[i - 1].gap_stats[1].mean))
                throw CheckFailure("coupling gap did not decrease with n");
        std::cout << "check passed\n";
    }
    return kExitOk;
}

int cmd_convergence(const std::string& n_list, double r, int dim, int trials, std::uint64_t seed,
                    int threads, const std::string& out_prefix, bool check) {
    ExperimentConfig config = ExperimentConfig::euclidean_uniform(dim, 1, {r}, trials, 1, seed);
    config.n_list = parse_long_list(n_list);
    config.threads = threads;
    auto records = run_convergence(config);
    emit_results(out_prefix, "euclidean", config, records);
    if (check) {
        for (std::size_t i = 1; i < records.size(); ++i)
            if (!(records[i].beta_stats[1].stderr_ < records[i - 1].beta_stats[1].stderr_))
                throw CheckFailure("beta1/n dispersion did not decrease with n");
        std::cout << "check passed\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random Cech complexes over point processes: sampling, Betti numbers, and "
                 "thermodynamic-regime experiments"};
    app.require_subcommand(1);

    // --- sample ---
    auto* sample = app.add_subcommand("sample", "draw a point cloud and write it as CSV/binary");
    std::string sample_box, sample_manifold_name, sample_density = "uniform", sample_out;
    int sample_axis = 0;
    double sample_alpha = 0.0;
    long sample_n = 100;
    std::uint64_t sample_seed = 1;
    bool sample_binary = false, sample_poissonized = false;
    sample->add_option("--uniform-box", sample_box, "box as 'lo,hi[xlo,hi...]'");
    sample->add_option("--manifold", sample_manifold_name, "circle[:R] | torus[:R:r] | sphere");
    sample->add_option("--density", sample_density, "uniform | tilted")->capture_default_str();
    sample->add_option("--axis", sample_axis, "tilt axis");
    sample->add_option("--alpha", sample_alpha, "tilt strength");
    sample->add_option("--n", sample_n, "number of points")->capture_default_str();
    sample->add_option("--seed", sample_seed, "master seed")->capture_default_str();
    sample->add_option("--out", sample_out, "output path (default stdout)");
    sample->add_flag("--binary", sample_binary, "write the binary format");
    sample->add_flag("--poissonized", sample_poissonized, "Poissonize the count");

    // --- betti ---
    auto* betti = app.add_subcommand("betti", "Betti numbers and simplex counts of a cloud file");
    std::string betti_cloud, betti_metric = "euclidean", betti_matrix;
    double betti_r = 0.0;
    int betti_kmax = 1;
    bool betti_full = false;
    std::size_t betti_cap = 0;
    betti->add_option("--cloud", betti_cloud, "cloud file (CSV or binary)")->required();
    betti->add_option("--r", betti_r, "Cech radius")->required();
    betti->add_option("--metric", betti_metric, "euclidean | weighted")->capture_default_str();
    betti->add_option("--B", betti_matrix, "weighted-norm matrix, rows 'a,b;c,d'");
    betti->add_option("--k-max", betti_kmax, "highest Betti number")->capture_default_str();
    betti->add_flag("--full-dim", betti_full, "build all dimensions and report chi");
    betti->add_option("--simplex-cap", betti_cap, "memory guard (also CECHLAB_MAX_SIMPLICES)");

    // --- lln ---
    auto* lln = app.add_subcommand("lln", "thermodynamic-regime LLN curves");
    std::string lln_preset, lln_config, lln_out;
    long lln_n = 0;
    int lln_trials = 0, lln_threads = 0;
    std::uint64_t lln_seed = 0;
    bool lln_check = false;
    lln->add_option("--preset", lln_preset, "figure2-2d | figure2-3d | circle-beta0");
    lln->add_option("--config", lln_config, "experiment config JSON file");
    lln->add_option("--n", lln_n, "override points per trial");
    lln->add_option("--trials", lln_trials, "override trial count");
    lln->add_option("--seed", lln_seed, "override master seed");
    lln->add_option("--threads", lln_threads, "worker threads (0 = all cores)");
    lln->add_option("--out", lln_out, "output prefix");
    lln->add_flag("--check", lln_check, "verify the preset's acceptance band (exit 4 on failure)");

    // --- betahat ---
    auto* betahat =
        app.add_subcommand("betahat", "estimate beta-hat_k(lambda, r) from homogeneous processes");
    int bh_dim = 2, bh_trials = 12, bh_kmax = 1, bh_threads = 0;
    double bh_lambda = 1.0, bh_r = 0.5, bh_l = 10000.0;
    std::uint64_t bh_seed = 101;
    std::string bh_out, bh_preset;
    bool bh_check = false;
    betahat->add_option("--N", bh_dim, "ambient dimension")->capture_default_str();
    betahat->add_option("--lambda", bh_lambda, "intensity")->capture_default_str();
    betahat->add_option("--r", bh_r, "radius")->capture_default_str();
    betahat->add_option("--L", bh_l, "window volume")->capture_default_str();
    betahat->add_option("--trials", bh_trials, "trials")->capture_default_str();
    betahat->add_option("--seed", bh_seed, "master seed")->capture_default_str();
    betahat->add_option("--k-max", bh_kmax, "highest Betti number")->capture_default_str();
    betahat->add_option("--threads", bh_threads, "worker threads");
    betahat->add_option("--out", bh_out, "output CSV path");
    betahat->add_option("--preset", bh_preset, "scaling-check");
    betahat->add_flag("--check", bh_check, "verify the scaling band (exit 4 on failure)");

    // --- coupling ---
    auto* coupling = app.add_subcommand("coupling", "binomial vs Poissonized simplex-count gap");
    std::string cp_nlist = "1000,10000", cp_out;
    double cp_r = 0.5;
    int cp_dim = 2, cp_trials = 20, cp_threads = 0;
    std::uint64_t cp_seed = 101;
    bool cp_check = false;
    coupling->add_option("--n", cp_nlist, "comma-separated n list")->capture_default_str();
    coupling->add_option("--r", cp_r, "thermodynamic r")->capture_default_str();
    coupling->add_option("--dim", cp_dim, "ambient dimension")->capture_default_str();
    coupling->add_option("--trials", cp_trials, "trials per n")->capture_default_str();
    coupling->add_option("--seed", cp_seed, "master seed")->capture_default_str();
    coupling->add_option("--threads", cp_threads, "worker threads");
    coupling->add_option("--out", cp_out, "output CSV path");
    coupling->add_flag("--check", cp_check, "require a decreasing gap (exit 4 on failure)");

    // --- convergence ---
    auto* convergence = app.add_subcommand("convergence", "dispersion trend across n");
    std::string cv_nlist = "1000,10000", cv_out;
    double cv_r = 0.5;
    int cv_dim = 2, cv_trials = 20, cv_threads = 0;
    std::uint64_t cv_seed = 101;
    bool cv_check = false;
    convergence->add_option("--n", cv_nlist, "comma-separated n list")->capture_default_str();
    convergence->add_option("--r", cv_r, "thermodynamic r")->capture_default_str();
    convergence->add_option("--dim", cv_dim, "ambient dimension")->capture_default_str();
    convergence->add_option("--trials", cv_trials, "trials per n")->capture_default_str();
    convergence->add_option("--seed", cv_seed, "master seed")->capture_default_str();
    convergence->add_option("--threads", cv_threads, "worker threads");
    convergence->add_option("--out", cv_out, "output prefix");
    convergence->add_flag("--check", cv_check, "require shrinking dispersion (exit 4 on failure)");

    try {
        app.parse(argc, argv);

        if (sample->parsed())
            return cmd_sample(sample_box, sample_manifold_name, sample_density, sample_axis,
                              sample_alpha, sample_n, sample_seed, sample_out, sample_binary,
                              sample_poissonized);
        if (betti->parsed())
            return cmd_betti(betti_cloud, betti_r, betti_metric, betti_matrix, betti_kmax,
                             betti_full, betti_cap);
        if (lln->parsed()) {
            ExperimentConfig config;
            if (!lln_preset.empty())
                apply_preset_lln(config, lln_preset);
            else if (!lln_config.empty())
                config = experiment_config_from_json(load_json_file(lln_config));
            else
                throw std::invalid_argument("lln: need --preset or --config");
            if (lln_n > 0) config.n = lln_n;
            if (lln_trials > 0) config.trials = lln_trials;
            if (lln_seed != 0) config.master_seed = lln_seed;
            config.threads = lln_threads;
            return run_lln_command(std::move(config), lln_preset, lln_out, lln_check);
        }
        if (betahat->parsed()) {
            if (bh_preset == "scaling-check") {
                bh_dim = 2;
                bh_lambda = 1.0;
                bh_r = 0.5;
                bh_l = 10000.0;
                bh_kmax = 1;
                bh_check = true;
            } else if (!bh_preset.empty()) {
                throw std::invalid_argument("unknown betahat preset '" + bh_preset + "'");
            }
            return cmd_betahat(bh_dim, bh_lambda, bh_r, bh_l, bh_trials, bh_seed, bh_kmax,
                               bh_threads, bh_out, bh_check);
        }
        if (coupling->parsed())
            return cmd_coupling(cp_nlist, cp_r, cp_dim, cp_trials, cp_seed, cp_threads, cp_out,
                                cp_check);
        if (convergence->parsed())
            return cmd_convergence(cv_nlist, cv_r, cv_dim, cv_trials, cv_seed, cv_threads, cv_out,
                                   cv_check);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitConfig;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kExitCheck;
    } catch (const resource_cap_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
