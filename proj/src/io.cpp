#include "cechlab/io.hpp"

#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace cechlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Point clouds

void write_cloud_csv(std::ostream& out, const PointCloud& cloud, const std::string& config_line) {
    out << "# dim=" << cloud.dim() << " count=" << cloud.size() << " seed=" << cloud.master_seed()
        << " tag=" << to_string(cloud.tag()) << "\n";
    if (!config_line.empty()) out << "# config: " << config_line << "\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (int a = 0; a < cloud.dim(); ++a) {
            if (a) out << ",";
            out << format_double(p[a]);
        }
        out << "\n";
    }
}

PointCloud read_cloud_csv(std::istream& in) {
    std::string line;
    int dim = 0;
    std::uint64_t seed = 0;
    ProcessTag tag = ProcessTag::binomial;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string token;
            while (hs >> token) {
                auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                std::string key = token.substr(0, eq), val = token.substr(eq + 1);
                if (key == "dim") dim = std::stoi(val);
                else if (key == "seed") seed = std::stoull(val);
                else if (key == "tag") tag = process_tag_from_string(val);
            }
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t pos = 0;
            double v = std::stod(cell, &pos);
            row.push_back(v);
        }
        if (dim == 0) dim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != dim)
            throw std::runtime_error("cloud csv: inconsistent row width");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    if (dim == 0) dim = 1;  // empty file: dimension is moot
    return PointCloud(dim, std::move(flat), seed, tag);
}

namespace {
template <typename T>
void put_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("cloud binary: truncated stream");
    return v;
}
}  // namespace

void write_cloud_binary(std::ostream& out, const PointCloud& cloud) {
    out.write("CLB1", 4);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cloud.dim()));
    put_raw<std::uint64_t>(out, cloud.size());
    put_raw<std::uint64_t>(out, cloud.master_seed());
    put_raw<std::uint8_t>(out, static_cast<std::uint8_t>(cloud.tag()));
    auto flat = cloud.flat();
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

PointCloud read_cloud_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CLB1", 4) != 0)
        throw std::runtime_error("cloud binary: bad magic");
    auto dim = get_raw<std::uint32_t>(in);
    auto count = get_raw<std::uint64_t>(in);
    auto seed = get_raw<std::uint64_t>(in);
    auto tag = static_cast<ProcessTag>(get_raw<std::uint8_t>(in));
    std::vector<double> flat(count * dim);
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw std::runtime_error("cloud binary: truncated payload");
    return PointCloud(static_cast<int>(dim), std::move(flat), seed, tag);
}

// ---------------------------------------------------------------------------
// Complexes

void write_complex(std::ostream& out, const SimplicialComplex& complex) {
    // Global (value, dim, lex) order: per-dimension arrays are already
    // (value, lex)-sorted, so merge by value with dimension as tiebreak.
    const int top = complex.top_dim();
    std::vector<std::size_t> cursor(static_cast<std::size_t>(top) + 1, 0);
    for (;;) {
        int best = -1;
        for (int k = 0; k <= top; ++k) {
            if (cursor[k] >= complex.count(k)) continue;
            if (best == -1 || complex.value(k, cursor[k]) < complex.value(best, cursor[best]))
                best = k;
        }
        if (best == -1) break;
        auto tup = complex.simplex(best, cursor[best]);
        out << best;
        for (auto v : tup) out << " " << v;
        out << " " << format_double(complex.value(best, cursor[best])) << "\n";
        ++cursor[best];
    }
}

SimplicialComplex read_complex(std::istream& in) {
    std::vector<std::vector<std::uint32_t>> tuples;
    std::vector<std::vector<double>> values;
    std::string line;
    std::size_t vertex_count = 0;
    double r_max = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int k;
        if (!(ls >> k) || k < 0) throw std::runtime_error("complex: malformed line");
        std::vector<std::uint32_t> tup(static_cast<std::size_t>(k) + 1);
        for (auto& v : tup)
            if (!(ls >> v)) throw std::runtime_error("complex: truncated simplex line");
        double value;
        if (!(ls >> value)) throw std::runtime_error("complex: missing filtration value");
        if (static_cast<std::size_t>(k) >= tuples.size()) {
            tuples.resize(k + 1);
            values.resize(k + 1);
        }
        tuples[k].insert(tuples[k].end(), tup.begin(), tup.end());
        values[k].push_back(value);
        for (auto v : tup) vertex_count = std::max<std::size_t>(vertex_count, v + 1);
        r_max = std::max(r_max, value);
    }
    const int built = static_cast<int>(tuples.size()) - 1;
    return complex_from_simplices(vertex_count, built < 0 ? 0 : built, r_max, std::move(tuples),
                                  std::move(values));
}

// ---------------------------------------------------------------------------
// Homology artifacts

void write_pairs_csv(std::ostream& out, const PersistenceDiagram& diagram) {
    out << "k,birth,death\n";
    for (const auto& p : diagram.pairs)
        out << p.dim << "," << format_double(p.birth) << ","
            << (p.infinite() ? std::string("inf") : format_double(p.death)) << "\n";
}

json betti_to_json(const BettiVector& bv) {
    json arr = json::array();
    for (auto v : bv.values) arr.push_back(v);
    return json{{"field", BettiVector::field}, {"betti", arr}};
}

// ---------------------------------------------------------------------------
// Limit tables

void write_limit_csv_header(std::ostream& out) { out << "m,k,lambda,r,value,stderr,samples\n"; }

void write_limit_row(std::ostream& out, int m, int k, double lambda, double r,
                     const LimitEstimate& estimate) {
    out << m << "," << k << "," << format_double(lambda) << "," << format_double(r) << ","
        << format_double(estimate.value) << "," << format_double(estimate.stderr_) << ","
        << estimate.samples << "\n";
}

// ---------------------------------------------------------------------------
// Results

void write_results_csv(std::ostream& out, const std::string& setting,
                       const std::vector<ResultRecord>& records, int trials,
                       const std::string& header_comment) {
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "setting,n,r,k,stat,mean,stderr,trials,seed\n";
    for (const auto& rec : records) {
        auto row = [&](int k, const char* stat, const MeanStderr& ms) {
            out << setting << "," << rec.n << "," << format_double(rec.r) << "," << k << "," << stat
                << "," << format_double(ms.mean) << "," << format_double(ms.stderr_) << "," << trials
                << "," << rec.seed << "\n";
        };
        for (std::size_t k = 0; k < rec.beta_stats.size(); ++k)
            row(static_cast<int>(k), "beta", rec.beta_stats[k]);
        for (std::size_t j = 0; j < rec.s_stats.size(); ++j)
            row(static_cast<int>(j), "S", rec.s_stats[j]);
        if (!rec.trials.empty() && rec.trials.front().has_chi) row(0, "chi", rec.chi_stats);
    }
}

json results_to_json(const std::string& setting, const std::vector<ResultRecord>& records) {
    json out;
    out["setting"] = setting;
    json recs = json::array();
    for (const auto& rec : records) {
        json r;
        r["r"] = rec.r;
        r["n"] = rec.n;
        r["seed"] = rec.seed;
        r["wall_seconds"] = rec.wall_seconds;
        json beta = json::array(), s = json::array();
        for (const auto& ms : rec.beta_stats) beta.push_back({{"mean", ms.mean}, {"stderr", ms.stderr_}});
        for (const auto& ms : rec.s_stats) s.push_back({{"mean", ms.mean}, {"stderr", ms.stderr_}});
        r["beta_over_n"] = beta;
        r["S_over_n"] = s;
        if (!rec.trials.empty() && rec.trials.front().has_chi)
            r["chi_over_n"] = {{"mean", rec.chi_stats.mean}, {"stderr", rec.chi_stats.stderr_}};
        recs.push_back(std::move(r));
    }
    out["records"] = std::move(recs);
    return out;
}

void write_gnuplot_table(std::ostream& out, const std::vector<ResultRecord>& records) {
    if (records.empty()) return;
    out << "# r n";
    for (std::size_t k = 0; k < records.front().beta_stats.size(); ++k)
        out << " beta" << k << " beta" << k << "_se";
    for (std::size_t j = 0; j < records.front().s_stats.size(); ++j)
        out << " S" << j << " S" << j << "_se";
    const bool chi = !records.front().trials.empty() && records.front().trials.front().has_chi;
    if (chi) out << " chi chi_se";
    out << "\n";
    for (const auto& rec : records) {
        out << format_double(rec.r) << " " << rec.n;
        for (const auto& ms : rec.beta_stats) out << " " << format_double(ms.mean) << " " << format_double(ms.stderr_);
        for (const auto& ms : rec.s_stats) out << " " << format_double(ms.mean) << " " << format_double(ms.stderr_);
        if (chi) out << " " << format_double(rec.chi_stats.mean) << " " << format_double(rec.chi_stats.stderr_);
        out << "\n";
    }
}

void write_coupling_csv(std::ostream& out, const std::vector<CouplingRecord>& records,
                        const std::string& header_comment) {
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "n,j,mean_gap,stderr,trials\n";
    for (const auto& rec : records)
        for (std::size_t j = 0; j < rec.gap_stats.size(); ++j)
            out << rec.n << "," << j << "," << format_double(rec.gap_stats[j].mean) << ","
                << format_double(rec.gap_stats[j].stderr_) << "," << rec.trials.size() << "\n";
}

// ---------------------------------------------------------------------------
// Declarative configs

namespace {

AtlasDensity density_from_json(const json& spec) {
    AtlasDensity d;
    if (spec.is_null()) return d;
    const std::string kind = spec.value("kind", "uniform");
    if (kind == "uniform") {
        d.kind = AtlasDensity::Kind::uniform;
    } else if (kind == "tilted") {
        d.kind = AtlasDensity::Kind::tilted;
        d.axis = spec.value("axis", 0);
        d.alpha = spec.value("alpha", 0.0);
    } else {
        throw std::invalid_argument("atlas config: unknown density kind '" + kind + "'");
    }
    return d;
}

Box box_from_json(const json& spec) {
    std::vector<double> lo, hi;
    for (const auto& axis : spec) {
        if (!axis.is_array() || axis.size() != 2)
            throw std::invalid_argument("config: box axes must be [lo, hi] pairs");
        lo.push_back(axis[0].get<double>());
        hi.push_back(axis[1].get<double>());
    }
    return Box(std::move(lo), std::move(hi));
}

json box_to_json(const Box& box) {
    json out = json::array();
    for (int a = 0; a < box.dim(); ++a) out.push_back({box.lo[a], box.hi[a]});
    return out;
}

std::shared_ptr<const Chart> chart_from_json(const json& spec) {
    const std::string kind = spec.value("kind", "");
    if (kind == "circle") return make_circle_chart(spec.value("radius", 1.0));
    if (kind == "torus")
        return make_torus_chart(spec.value("major_radius", 2.0), spec.value("minor_radius", 1.0));
    if (kind == "sphere") return make_sphere_chart();
    if (kind == "hemisphere+") return make_hemisphere_chart(+1);
    if (kind == "hemisphere-") return make_hemisphere_chart(-1);
    throw std::invalid_argument("atlas config: unknown chart kind '" + kind + "'");
}

}  // namespace

ChartAtlas atlas_from_json(const json& spec) {
    if (!spec.contains("charts") || !spec["charts"].is_array() || spec["charts"].empty())
        throw std::invalid_argument("atlas config: needs a nonempty 'charts' array");
    std::vector<AtlasPiece> pieces;
    for (const auto& entry : spec["charts"]) {
        auto chart = chart_from_json(entry);
        Box domain = entry.contains("domain") ? box_from_json(entry["domain"]) : chart->domain();
        pieces.push_back({std::move(chart), std::move(domain)});
    }
    return ChartAtlas(std::move(pieces), density_from_json(spec.value("density", json())));
}

ChartAtlas atlas_from_name(const std::string& name, AtlasDensity density) {
    std::vector<std::string> parts;
    std::istringstream ss(name);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.empty()) throw std::invalid_argument("atlas: empty name");
    if (parts[0] == "circle")
        return make_circle_atlas(parts.size() > 1 ? std::stod(parts[1]) : 1.0, density);
    if (parts[0] == "torus")
        return make_torus_atlas(parts.size() > 1 ? std::stod(parts[1]) : 2.0,
                                parts.size() > 2 ? std::stod(parts[2]) : 1.0, density);
    if (parts[0] == "sphere") return make_sphere_atlas(density);
    throw std::invalid_argument("atlas: unknown manifold '" + name + "'");
}

json experiment_config_to_json(const ExperimentConfig& config) {
    json out;
    out["setting"] = config.setting == ExperimentConfig::Setting::euclidean ? "euclidean" : "manifold";
    out["process"] = to_string(config.process);
    out["n"] = config.n;
    out["r_grid"] = config.r_grid;
    if (!config.n_list.empty()) out["n_list"] = config.n_list;
    out["trials"] = config.trials;
    out["k_max"] = config.k_max;
    out["chi"] = config.want_chi;
    out["seed"] = config.master_seed;
    out["threads"] = config.threads;
    if (config.simplex_cap) out["simplex_cap"] = config.simplex_cap;
    if (config.density) {
        if (config.density->is_uniform())
            out["density"] = {{"kind", "uniform_box"}, {"box", box_to_json(config.density->support())}};
        else
            out["density"] = {{"kind", "callable"}};
    }
    if (config.metric) {
        switch (config.metric->kind()) {
            case MetricSpec::Kind::euclidean:
                out["metric"] = {{"kind", "euclidean"}};
                break;
            case MetricSpec::Kind::weighted_norm: {
                const auto& b = config.metric->matrix();
                json rows = json::array();
                for (Eigen::Index i = 0; i < b.rows(); ++i) {
                    json row = json::array();
                    for (Eigen::Index j = 0; j < b.cols(); ++j) row.push_back(b(i, j));
                    rows.push_back(std::move(row));
                }
                out["metric"] = {{"kind", "weighted"}, {"B", std::move(rows)}};
                break;
            }
            case MetricSpec::Kind::chart_induced:
                out["metric"] = {{"kind", "chart_induced"}, {"chart", config.metric->chart().kind()}};
                break;
        }
    }
    if (config.atlas) {
        json charts = json::array();
        for (std::size_t i = 0; i < config.atlas->piece_count(); ++i) {
            const auto& piece = config.atlas->piece(i);
            charts.push_back({{"kind", piece.chart->kind()},
                              {"domain", box_to_json(piece.effective_domain)}});
        }
        json density{{"kind", config.atlas->density().kind == AtlasDensity::Kind::uniform
                                  ? "uniform"
                                  : "tilted"}};
        if (config.atlas->density().kind == AtlasDensity::Kind::tilted) {
            density["axis"] = config.atlas->density().axis;
            density["alpha"] = config.atlas->density().alpha;
        }
        out["atlas"] = {{"charts", std::move(charts)}, {"density", std::move(density)}};
    }
    return out;
}

ExperimentConfig experiment_config_from_json(const json& spec) {
    ExperimentConfig config;
    const std::string setting = spec.value("setting", "euclidean");
    if (setting == "euclidean")
        config.setting = ExperimentConfig::Setting::euclidean;
    else if (setting == "manifold")
        config.setting = ExperimentConfig::Setting::manifold;
    else
        throw std::invalid_argument("experiment config: unknown setting '" + setting + "'");

    config.process = process_tag_from_string(spec.value("process", "binomial"));
    config.n = spec.value("n", 10000L);
    if (spec.contains("r_grid")) config.r_grid = spec["r_grid"].get<std::vector<double>>();
    if (spec.contains("n_list")) config.n_list = spec["n_list"].get<std::vector<long>>();
    config.trials = spec.value("trials", 20);
    config.k_max = spec.value("k_max", 1);
    config.want_chi = spec.value("chi", false);
    config.master_seed = spec.value("seed", 1ULL);
    config.threads = spec.value("threads", 0);
    config.simplex_cap = spec.value("simplex_cap", 0ULL);

    if (config.setting == ExperimentConfig::Setting::euclidean) {
        if (!spec.contains("density"))
            throw std::invalid_argument("experiment config: euclidean setting needs a density");
        const json& ds = spec["density"];
        const std::string kind = ds.value("kind", "uniform_box");
        if (kind != "uniform_box")
            throw std::invalid_argument("experiment config: only uniform_box densities are file-loadable");
        config.density = DensitySpec::uniform_box(box_from_json(ds.at("box")));
        if (spec.contains("metric")) {
            const json& ms = spec["metric"];
            const std::string mk = ms.value("kind", "euclidean");
            if (mk == "euclidean") {
                config.metric = MetricSpec::euclidean(config.density->dim());
            } else if (mk == "weighted") {
                const auto& rows = ms.at("B");
                Eigen::MatrixXd b(rows.size(), rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i)
                    for (std::size_t j = 0; j < rows.size(); ++j) b(i, j) = rows[i][j].get<double>();
                config.metric = MetricSpec::weighted_norm(std::move(b));
            } else {
                throw std::invalid_argument("experiment config: unsupported metric kind '" + mk + "'");
            }
        }
    } else {
        if (!spec.contains("atlas"))
            throw std::invalid_argument("experiment config: manifold setting needs an atlas");
        config.atlas = std::make_shared<ChartAtlas>(atlas_from_json(spec["atlas"]));
    }
    return config;
}

}  // namespace cechlab
