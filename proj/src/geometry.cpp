#include "cechlab/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

#include "cechlab/rng.hpp"

namespace cechlab {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> p) {
    return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

void check_point_dim(const MetricSpec& m, std::span<const double> p, const char* who) {
    if (static_cast<int>(p.size()) != m.point_dim())
        throw std::invalid_argument(std::string(who) + ": point dimension mismatch");
}

}  // namespace

// ---------------------------------------------------------------------------
// Chart base

Eigen::MatrixXd Chart::jacobian(std::span<const double> x) const {
    const int m = param_dim();
    const int n = ambient_dim();
    const double h = tolerances().fd_step;
    Eigen::MatrixXd j(n, m);
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> fplus(n), fminus(n);
    for (int c = 0; c < m; ++c) {
        double orig = xp[c];
        xp[c] = orig + h;
        embed_into(xp, fplus);
        xp[c] = orig - h;
        embed_into(xp, fminus);
        xp[c] = orig;
        for (int r = 0; r < n; ++r) j(r, c) = (fplus[r] - fminus[r]) / (2 * h);
    }
    return j;
}

double Chart::jacobian_density_sup() const {
    // Grid estimate with a safety margin; built-ins override with the
    // analytic supremum.
    const Box& dom = domain();
    const int m = param_dim();
    const int g = 64;
    std::vector<double> x(m);
    std::vector<int> idx(m, 0);
    double best = 0.0;
    for (;;) {
        for (int a = 0; a < m; ++a)
            x[a] = dom.lo[a] + (idx[a] + 0.5) * (dom.hi[a] - dom.lo[a]) / g;
        if (in_domain(x)) best = std::max(best, jacobian_density(*this, x));
        int a = 0;
        while (a < m && ++idx[a] == g) idx[a++] = 0;
        if (a == m) break;
    }
    return best * 1.25;
}

double Chart::embed_norm_bound() const {
    const Box& dom = domain();
    const int m = param_dim();
    const int g = 64;
    std::vector<double> x(m);
    std::vector<double> z(ambient_dim());
    std::vector<int> idx(m, 0);
    double best = 0.0;
    for (;;) {
        for (int a = 0; a < m; ++a)
            x[a] = dom.lo[a] + (idx[a] + 0.5) * (dom.hi[a] - dom.lo[a]) / g;
        if (in_domain(x)) {
            embed_into(x, z);
            best = std::max(best, as_vec(z).norm());
        }
        int a = 0;
        while (a < m && ++idx[a] == g) idx[a++] = 0;
        if (a == m) break;
    }
    return best * 1.25;
}

// ---------------------------------------------------------------------------
// Built-in charts

namespace {

class CircleChart final : public Chart {
public:
    explicit CircleChart(double radius) : radius_(radius), domain_({0.0}, {2 * M_PI}) {
        if (radius <= 0) throw std::invalid_argument("circle chart: radius must be positive");
    }
    int param_dim() const override { return 1; }
    int ambient_dim() const override { return 2; }
    const Box& domain() const override { return domain_; }
    std::string kind() const override { return "circle"; }

    void embed_into(std::span<const double> x, std::span<double> out) const override {
        out[0] = radius_ * std::cos(x[0]);
        out[1] = radius_ * std::sin(x[0]);
    }
    Eigen::MatrixXd jacobian(std::span<const double> x) const override {
        Eigen::MatrixXd j(2, 1);
        j(0, 0) = -radius_ * std::sin(x[0]);
        j(1, 0) = radius_ * std::cos(x[0]);
        return j;
    }
    double jacobian_density_sup() const override { return radius_; }
    double embed_norm_bound() const override { return radius_; }

private:
    double radius_;
    Box domain_;
};

class TorusChart final : public Chart {
public:
    TorusChart(double major, double minor)
        : major_(major), minor_(minor), domain_({0.0, 0.0}, {2 * M_PI, 2 * M_PI}) {
        if (!(major > minor && minor > 0))
            throw std::invalid_argument("torus chart: need major > minor > 0");
    }
    int param_dim() const override { return 2; }
    int ambient_dim() const override { return 3; }
    const Box& domain() const override { return domain_; }
    std::string kind() const override { return "torus"; }

    void embed_into(std::span<const double> x, std::span<double> out) const override {
        const double u = x[0], v = x[1];
        const double ring = major_ + minor_ * std::cos(v);
        out[0] = ring * std::cos(u);
        out[1] = ring * std::sin(u);
        out[2] = minor_ * std::sin(v);
    }
    Eigen::MatrixXd jacobian(std::span<const double> x) const override {
        const double u = x[0], v = x[1];
        const double ring = major_ + minor_ * std::cos(v);
        Eigen::MatrixXd j(3, 2);
        j(0, 0) = -ring * std::sin(u);
        j(1, 0) = ring * std::cos(u);
        j(2, 0) = 0.0;
        j(0, 1) = -minor_ * std::sin(v) * std::cos(u);
        j(1, 1) = -minor_ * std::sin(v) * std::sin(u);
        j(2, 1) = minor_ * std::cos(v);
        return j;
    }
    double jacobian_density_sup() const override { return minor_ * (major_ + minor_); }
    double embed_norm_bound() const override { return major_ + minor_; }

private:
    double major_, minor_;
    Box domain_;
};

// Unit sphere in spherical coordinates (theta, phi); D = sin(theta).
// Rank degenerates exactly at the poles, which midpoint grids and the
// sin(theta) rejection density never visit.
class SphereChart final : public Chart {
public:
    SphereChart() : domain_({0.0, 0.0}, {M_PI, 2 * M_PI}) {}
    int param_dim() const override { return 2; }
    int ambient_dim() const override { return 3; }
    const Box& domain() const override { return domain_; }
    std::string kind() const override { return "sphere"; }

    void embed_into(std::span<const double> x, std::span<double> out) const override {
        const double th = x[0], ph = x[1];
        out[0] = std::sin(th) * std::cos(ph);
        out[1] = std::sin(th) * std::sin(ph);
        out[2] = std::cos(th);
    }
    Eigen::MatrixXd jacobian(std::span<const double> x) const override {
        const double th = x[0], ph = x[1];
        Eigen::MatrixXd j(3, 2);
        j(0, 0) = std::cos(th) * std::cos(ph);
        j(1, 0) = std::cos(th) * std::sin(ph);
        j(2, 0) = -std::sin(th);
        j(0, 1) = -std::sin(th) * std::sin(ph);
        j(1, 1) = std::sin(th) * std::cos(ph);
        j(2, 1) = 0.0;
        return j;
    }
    double jacobian_density_sup() const override { return 1.0; }
    double embed_norm_bound() const override { return 1.0; }

private:
    Box domain_;
};

// Graph chart over a square strictly inside the unit disk, so the Jacobian
// density 1/sqrt(1 - x^2 - y^2) stays bounded.
class HemisphereChart final : public Chart {
public:
    explicit HemisphereChart(int sign)
        : sign_(sign >= 0 ? 1.0 : -1.0), domain_({-kSide, -kSide}, {kSide, kSide}) {}
    int param_dim() const override { return 2; }
    int ambient_dim() const override { return 3; }
    const Box& domain() const override { return domain_; }
    std::string kind() const override { return sign_ > 0 ? "hemisphere+" : "hemisphere-"; }

    void embed_into(std::span<const double> x, std::span<double> out) const override {
        out[0] = x[0];
        out[1] = x[1];
        out[2] = sign_ * std::sqrt(std::max(0.0, 1.0 - x[0] * x[0] - x[1] * x[1]));
    }
    Eigen::MatrixXd jacobian(std::span<const double> x) const override {
        const double w = std::sqrt(std::max(1e-300, 1.0 - x[0] * x[0] - x[1] * x[1]));
        Eigen::MatrixXd j(3, 2);
        j(0, 0) = 1.0;
        j(1, 0) = 0.0;
        j(0, 1) = 0.0;
        j(1, 1) = 1.0;
        j(2, 0) = -sign_ * x[0] / w;
        j(2, 1) = -sign_ * x[1] / w;
        return j;
    }
    double jacobian_density_sup() const override {
        return 1.0 / std::sqrt(1.0 - 2 * kSide * kSide);
    }
    double embed_norm_bound() const override { return 1.0; }

    static constexpr double kSide = 0.6;

private:
    double sign_;
    Box domain_;
};

class FunctionChart final : public Chart {
public:
    FunctionChart(int m, int n, Box dom,
                  std::function<void(std::span<const double>, std::span<double>)> map, std::string kind)
        : m_(m), n_(n), domain_(std::move(dom)), map_(std::move(map)), kind_(std::move(kind)) {
        if (m < 1 || n < m) throw std::invalid_argument("function chart: need 1 <= m <= N");
        if (domain_.dim() != m) throw std::invalid_argument("function chart: domain dimension mismatch");
    }
    int param_dim() const override { return m_; }
    int ambient_dim() const override { return n_; }
    const Box& domain() const override { return domain_; }
    std::string kind() const override { return kind_; }
    void embed_into(std::span<const double> x, std::span<double> out) const override { map_(x, out); }

private:
    int m_, n_;
    Box domain_;
    std::function<void(std::span<const double>, std::span<double>)> map_;
    std::string kind_;
};

}  // namespace

std::shared_ptr<const Chart> make_circle_chart(double radius) {
    return std::make_shared<CircleChart>(radius);
}
std::shared_ptr<const Chart> make_torus_chart(double major_radius, double minor_radius) {
    return std::make_shared<TorusChart>(major_radius, minor_radius);
}
std::shared_ptr<const Chart> make_sphere_chart() { return std::make_shared<SphereChart>(); }
std::shared_ptr<const Chart> make_hemisphere_chart(int sign) {
    return std::make_shared<HemisphereChart>(sign);
}
std::shared_ptr<const Chart> make_function_chart(
    int param_dim, int ambient_dim, Box domain,
    std::function<void(std::span<const double>, std::span<double>)> map, std::string kind) {
    return std::make_shared<FunctionChart>(param_dim, ambient_dim, std::move(domain), std::move(map),
                                           std::move(kind));
}

// ---------------------------------------------------------------------------
// MetricSpec

MetricSpec MetricSpec::euclidean(int dim) {
    if (dim < 1) throw std::invalid_argument("euclidean metric: dimension must be positive");
    MetricSpec m;
    m.kind_ = Kind::euclidean;
    m.point_dim_ = dim;
    return m;
}

MetricSpec MetricSpec::weighted_norm(Eigen::MatrixXd b) {
    if (b.rows() != b.cols() || b.rows() < 1)
        throw std::invalid_argument("weighted norm: B must be square");
    if (!b.isApprox(b.transpose(), 1e-12))
        throw std::invalid_argument("weighted norm: B must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("weighted norm: B must be positive definite");
    MetricSpec m;
    m.kind_ = Kind::weighted_norm;
    m.point_dim_ = static_cast<int>(b.rows());
    m.b_ = std::move(b);
    return m;
}

MetricSpec MetricSpec::chart_induced(std::shared_ptr<const Chart> chart) {
    if (!chart) throw std::invalid_argument("chart metric: null chart");
    MetricSpec m;
    m.kind_ = Kind::chart_induced;
    m.point_dim_ = chart->param_dim();
    m.chart_ = std::move(chart);
    return m;
}

const Eigen::MatrixXd& MetricSpec::matrix() const {
    if (kind_ != Kind::weighted_norm) throw std::logic_error("MetricSpec::matrix: not a weighted norm");
    return b_;
}

const Chart& MetricSpec::chart() const {
    if (kind_ != Kind::chart_induced) throw std::logic_error("MetricSpec::chart: not chart-induced");
    return *chart_;
}

// ---------------------------------------------------------------------------
// Operations

double distance(const MetricSpec& metric, std::span<const double> y, std::span<const double> z) {
    check_point_dim(metric, y, "distance");
    check_point_dim(metric, z, "distance");
    switch (metric.kind()) {
        case MetricSpec::Kind::euclidean:
            return euclidean_distance(y, z);
        case MetricSpec::Kind::weighted_norm:
            return (metric.matrix() * (as_vec(y) - as_vec(z))).norm();
        case MetricSpec::Kind::chart_induced: {
            const Chart& c = metric.chart();
            if (!c.in_domain(y) || !c.in_domain(z))
                throw std::domain_error("distance: point outside chart parameter domain");
            std::vector<double> fy(c.ambient_dim()), fz(c.ambient_dim());
            c.embed_into(y, fy);
            c.embed_into(z, fz);
            return euclidean_distance(fy, fz);
        }
    }
    return 0.0;
}

std::vector<double> whiten(const MetricSpec& metric, std::span<const double> flat_points) {
    const int d = metric.point_dim();
    if (flat_points.size() % d != 0)
        throw std::invalid_argument("whiten: flat point buffer not a multiple of the dimension");
    switch (metric.kind()) {
        case MetricSpec::Kind::euclidean:
            return std::vector<double>(flat_points.begin(), flat_points.end());
        case MetricSpec::Kind::weighted_norm: {
            const Eigen::MatrixXd& b = metric.matrix();
            std::vector<double> out(flat_points.size());
            const std::size_t count = flat_points.size() / d;
            for (std::size_t i = 0; i < count; ++i) {
                Eigen::Map<const Eigen::VectorXd> p(flat_points.data() + i * d, d);
                Eigen::Map<Eigen::VectorXd>(out.data() + i * d, d) = b * p;
            }
            return out;
        }
        case MetricSpec::Kind::chart_induced:
            throw std::invalid_argument("whiten: unsupported for chart-induced metrics, use embed");
    }
    return {};
}

std::vector<double> embed(const Chart& chart, std::span<const double> x) {
    if (static_cast<int>(x.size()) != chart.param_dim())
        throw std::invalid_argument("embed: parameter dimension mismatch");
    if (!chart.in_domain(x)) throw std::domain_error("embed: point outside chart domain");
    std::vector<double> out(chart.ambient_dim());
    chart.embed_into(x, out);
    return out;
}

double jacobian_density(const Chart& chart, std::span<const double> x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(chart.jacobian(x));
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < tolerances().rank_cutoff)
        throw degenerate_chart_error("jacobian_density: rank-deficient Jacobian");
    double d = 1.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) d *= sv(i);
    return d;
}

double jacobian_density_unchecked(const Chart& chart, std::span<const double> x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(chart.jacobian(x));
    const auto& sv = svd.singularValues();
    double d = 1.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) d *= sv(i);
    return d;
}

MetricRatioBounds metric_ratio_probe(const MetricSpec& metric, std::span<const double> flat_points,
                                     long pair_budget, std::uint64_t seed) {
    const int d = metric.point_dim();
    if (flat_points.size() % d != 0)
        throw std::invalid_argument("metric_ratio_probe: flat point buffer not a multiple of the dimension");
    const std::size_t count = flat_points.size() / d;
    if (count < 2) throw std::invalid_argument("metric_ratio_probe: need at least two points");
    if (pair_budget < 1) throw std::invalid_argument("metric_ratio_probe: pair budget must be positive");

    auto point = [&](std::size_t i) { return flat_points.subspan(i * d, d); };

    MetricRatioBounds out{std::numeric_limits<double>::infinity(), 0.0};
    bool any = false;
    auto consider = [&](std::size_t i, std::size_t j) {
        double den = euclidean_distance(point(i), point(j));
        if (den == 0.0) return;
        double ratio = distance(metric, point(i), point(j)) / den;
        out.c_est = std::min(out.c_est, ratio);
        out.big_c_est = std::max(out.big_c_est, ratio);
        any = true;
    };

    const long total_pairs =
        static_cast<long>(count) * static_cast<long>(count - 1) / 2;
    if (total_pairs <= pair_budget) {
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = i + 1; j < count; ++j) consider(i, j);
    } else {
        Rng rng(derive_seed(seed, {count, static_cast<std::uint64_t>(pair_budget)}));
        for (long k = 0; k < pair_budget; ++k) {
            std::size_t i = rng.next_below(count);
            std::size_t j = rng.next_below(count - 1);
            if (j >= i) ++j;
            consider(i, j);
        }
    }
    if (!any) throw degenerate_input_error("metric_ratio_probe: all sampled pairs coincide");
    return out;
}

// ---------------------------------------------------------------------------
// ChartAtlas

double quadrature_over_piece(
    const AtlasPiece& piece,
    const std::function<double(std::span<const double>, std::span<const double>, double)>& f,
    int grid_per_axis) {
    const Chart& chart = *piece.chart;
    const Box& dom = piece.effective_domain;
    const int m = chart.param_dim();
    std::vector<double> x(m), z(chart.ambient_dim());
    std::vector<double> step(m);
    double cell = 1.0;
    for (int a = 0; a < m; ++a) {
        step[a] = (dom.hi[a] - dom.lo[a]) / grid_per_axis;
        cell *= step[a];
    }
    std::vector<int> idx(m, 0);
    double sum = 0.0;
    for (;;) {
        for (int a = 0; a < m; ++a) x[a] = dom.lo[a] + (idx[a] + 0.5) * step[a];
        if (chart.in_domain(x)) {
            chart.embed_into(x, z);
            sum += f(x, z, jacobian_density(chart, x));
        }
        int a = 0;
        while (a < m && ++idx[a] == grid_per_axis) idx[a++] = 0;
        if (a == m) break;
    }
    return sum * cell;
}

ChartAtlas::ChartAtlas(std::vector<AtlasPiece> pieces, AtlasDensity density, int grid_per_axis)
    : pieces_(std::move(pieces)), density_(density) {
    if (pieces_.empty()) throw std::invalid_argument("atlas: no pieces");
    ambient_dim_ = pieces_[0].chart->ambient_dim();
    intrinsic_dim_ = pieces_[0].chart->param_dim();
    for (const auto& p : pieces_) {
        if (p.chart->ambient_dim() != ambient_dim_ || p.chart->param_dim() != intrinsic_dim_)
            throw std::invalid_argument("atlas: mixed chart dimensions");
        const Box& dom = p.chart->domain();
        for (int a = 0; a < intrinsic_dim_; ++a)
            if (p.effective_domain.lo[a] < dom.lo[a] - 1e-12 ||
                p.effective_domain.hi[a] > dom.hi[a] + 1e-12)
                throw std::invalid_argument("atlas: effective domain exceeds chart domain");
    }
    // Effective domains of pieces sharing a chart must not overlap.
    for (std::size_t i = 0; i < pieces_.size(); ++i)
        for (std::size_t j = i + 1; j < pieces_.size(); ++j) {
            if (pieces_[i].chart != pieces_[j].chart) continue;
            bool overlap = true;
            for (int a = 0; a < intrinsic_dim_; ++a) {
                if (pieces_[i].effective_domain.hi[a] <= pieces_[j].effective_domain.lo[a] ||
                    pieces_[j].effective_domain.hi[a] <= pieces_[i].effective_domain.lo[a])
                    overlap = false;
            }
            if (overlap) throw std::invalid_argument("atlas: effective domains overlap in parameter space");
        }

    auto unnorm_mass = [&](const AtlasPiece& p, int g) {
        return quadrature_over_piece(
            p, [&](std::span<const double>, std::span<const double> z, double dphi) {
                return kappa_unnormalized(z) * dphi;
            },
            g);
    };

    double z_coarse = 0.0, z_fine = 0.0;
    std::vector<double> fine(pieces_.size());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        fine[i] = unnorm_mass(pieces_[i], grid_per_axis);
        z_fine += fine[i];
        z_coarse += unnorm_mass(pieces_[i], std::max(2, grid_per_axis / 2));
    }
    if (!(z_fine > 0)) throw invalid_density_error("atlas: density integrates to zero");
    if (std::abs(z_fine - z_coarse) > tolerances().quadrature_rel * std::abs(z_fine))
        throw resolution_warning_error("atlas: piece-mass quadrature did not converge between grids");

    normalizer_ = z_fine;
    masses_.resize(pieces_.size());
    envelopes_.resize(pieces_.size());
    total_mass_ = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        masses_[i] = fine[i] / normalizer_;
        total_mass_ += masses_[i];
        // Envelope from analytic factor bounds, so it dominates the true sup.
        double kappa_bound = 1.0;
        if (density_.kind == AtlasDensity::Kind::tilted)
            kappa_bound = 1.0 + std::abs(density_.alpha) * pieces_[i].chart->embed_norm_bound();
        envelopes_[i] = kappa_bound / normalizer_ * pieces_[i].chart->jacobian_density_sup();
    }
}

double ChartAtlas::kappa_unnormalized(std::span<const double> z) const {
    switch (density_.kind) {
        case AtlasDensity::Kind::uniform:
            return 1.0;
        case AtlasDensity::Kind::tilted: {
            if (density_.axis < 0 || density_.axis >= static_cast<int>(z.size()))
                throw invalid_density_error("atlas density: tilt axis out of range");
            double v = 1.0 + density_.alpha * z[density_.axis];
            if (v < 0) throw invalid_density_error("atlas density: tilted density is negative on the manifold");
            return v;
        }
    }
    return 1.0;
}

double ChartAtlas::kappa(std::span<const double> z) const {
    return kappa_unnormalized(z) / normalizer_;
}

ChartAtlas make_circle_atlas(double radius, AtlasDensity density) {
    auto chart = make_circle_chart(radius);
    return ChartAtlas({{chart, chart->domain()}}, density);
}

ChartAtlas make_torus_atlas(double major_radius, double minor_radius, AtlasDensity density) {
    auto chart = make_torus_chart(major_radius, minor_radius);
    return ChartAtlas({{chart, chart->domain()}}, density);
}

ChartAtlas make_sphere_atlas(AtlasDensity density) {
    auto chart = make_sphere_chart();
    return ChartAtlas({{chart, chart->domain()}}, density);
}

ChartProbeReport validate_chart(const Chart& chart, int probes, std::uint64_t seed) {
    const Box& dom = chart.domain();
    const int m = chart.param_dim();
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(probes)}));
    ChartProbeReport report{std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};
    std::vector<double> prev;
    std::vector<double> x(m);
    std::vector<double> fx(chart.ambient_dim()), fp(chart.ambient_dim());
    for (int i = 0; i < probes; ++i) {
        do {
            for (int a = 0; a < m; ++a) x[a] = rng.next_in(dom.lo[a], dom.hi[a]);
        } while (!chart.in_domain(x));

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(chart.jacobian(x));
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        report.min_singular_value = std::min(report.min_singular_value, smin);
        if (smin < tolerances().rank_cutoff)
            throw degenerate_chart_error("validate_chart: rank-deficient Jacobian at probe point");

        if (!prev.empty()) {
            double den = euclidean_distance(x, prev);
            if (den > 0) {
                chart.embed_into(x, fx);
                chart.embed_into(prev, fp);
                double ratio = euclidean_distance(fx, fp) / den;
                report.injectivity_ratio = std::min(report.injectivity_ratio, ratio);
                if (!(ratio > 0))
                    throw degenerate_chart_error("validate_chart: distinct parameters embed to one point");
            }
        }
        prev = x;
    }
    return report;
}

}  // namespace cechlab
