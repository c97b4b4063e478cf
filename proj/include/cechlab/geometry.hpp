#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cechlab/common.hpp"

namespace cechlab {

// C^1 parametrization of a manifold patch: phi maps a box domain in R^m
// into R^N. Built-in charts provide analytic Jacobians; FunctionChart falls
// back to central finite differences with the configured step.
class Chart {
public:
    virtual ~Chart() = default;

    virtual int param_dim() const = 0;
    virtual int ambient_dim() const = 0;
    virtual const Box& domain() const = 0;
    virtual std::string kind() const = 0;

    virtual void embed_into(std::span<const double> x, std::span<double> out) const = 0;

    // ambient_dim x param_dim matrix of partials.
    virtual Eigen::MatrixXd jacobian(std::span<const double> x) const;

    // Domain membership; charts with non-box constraints refine this.
    virtual bool in_domain(std::span<const double> x) const { return domain().contains(x); }

    // Upper bound for sqrt(det(J^t J)) over the domain, used as the
    // rejection envelope factor. Built-ins return the analytic supremum.
    virtual double jacobian_density_sup() const;

    // Upper bound for ||phi(x)|| over the domain (envelope for densities
    // expressed in ambient coordinates).
    virtual double embed_norm_bound() const;
};

std::shared_ptr<const Chart> make_circle_chart(double radius = 1.0);
std::shared_ptr<const Chart> make_torus_chart(double major_radius, double minor_radius);
std::shared_ptr<const Chart> make_sphere_chart();  // spherical coordinates, unit S^2
// Graph chart z = sign * sqrt(1 - x^2 - y^2) over the inscribed square of the unit disk.
std::shared_ptr<const Chart> make_hemisphere_chart(int sign);
// User-supplied map with finite-difference Jacobian.
std::shared_ptr<const Chart> make_function_chart(
    int param_dim, int ambient_dim, Box domain,
    std::function<void(std::span<const double>, std::span<double>)> map, std::string kind = "custom");

// Metric on point clouds: Euclidean, weighted norm d(y,z) = ||B(y-z)||, or
// chart-induced rho(y,z) = ||phi(y) - phi(z)|| on the chart's parameter domain.
class MetricSpec {
public:
    enum class Kind { euclidean, weighted_norm, chart_induced };

    static MetricSpec euclidean(int dim);
    // B must be symmetric positive definite (validated by Cholesky).
    static MetricSpec weighted_norm(Eigen::MatrixXd b);
    static MetricSpec chart_induced(std::shared_ptr<const Chart> chart);

    Kind kind() const { return kind_; }
    // Dimension of the points this metric accepts (ambient N, or the chart's m).
    int point_dim() const { return point_dim_; }
    const Eigen::MatrixXd& matrix() const;
    const Chart& chart() const;

private:
    MetricSpec() = default;
    Kind kind_ = Kind::euclidean;
    int point_dim_ = 0;
    Eigen::MatrixXd b_;
    std::shared_ptr<const Chart> chart_;
};

// rho(y, z) under the metric. Dimension mismatch -> invalid_argument;
// chart-induced points outside the parameter domain -> domain_error.
double distance(const MetricSpec& metric, std::span<const double> y, std::span<const double> z);

// Maps points through B so Euclidean distances of the images equal the
// weighted-norm distances of the originals. Euclidean is the identity.
// Chart-induced metrics are not whitenable; use embed instead.
std::vector<double> whiten(const MetricSpec& metric, std::span<const double> flat_points);

// phi(x), with domain check.
std::vector<double> embed(const Chart& chart, std::span<const double> x);

// sqrt(det(J^t J)) at x; throws degenerate_chart_error when the smallest
// singular value of J drops below the rank cutoff.
double jacobian_density(const Chart& chart, std::span<const double> x);

// Same quantity without the rank check. Rejection samplers use this: a
// vanishing density at a degenerate parameter simply never gets accepted.
double jacobian_density_unchecked(const Chart& chart, std::span<const double> x);

struct MetricRatioBounds {
    double c_est = 0.0;
    double big_c_est = 0.0;
};

// Empirical bounds on rho(y,z)/||y-z|| over up to pair_budget sampled
// distinct pairs of the given points.
MetricRatioBounds metric_ratio_probe(const MetricSpec& metric, std::span<const double> flat_points,
                                     long pair_budget, std::uint64_t seed = 0x636c6162ULL);

// Named density families on ambient coordinates for atlas configs.
struct AtlasDensity {
    enum class Kind { uniform, tilted };
    Kind kind = Kind::uniform;
    int axis = 0;       // tilted: kappa ~ 1 + alpha * z[axis]
    double alpha = 0.0;
};

struct AtlasPiece {
    std::shared_ptr<const Chart> chart;
    Box effective_domain;  // C_i, subset of the chart's parameter domain
};

// Finite chart atlas with pairwise-disjoint effective parameter domains and
// a probability density kappa on the manifold. Piece masses
// int_{C_i} kappa(phi(x)) D(x) dx are precomputed by midpoint quadrature and
// kappa is normalized so the masses sum to one.
class ChartAtlas {
public:
    ChartAtlas(std::vector<AtlasPiece> pieces, AtlasDensity density, int grid_per_axis = 256);

    int ambient_dim() const { return ambient_dim_; }
    int intrinsic_dim() const { return intrinsic_dim_; }
    std::size_t piece_count() const { return pieces_.size(); }
    const AtlasPiece& piece(std::size_t i) const { return pieces_[i]; }
    const std::vector<double>& piece_masses() const { return masses_; }
    double total_mass() const { return total_mass_; }
    const AtlasDensity& density() const { return density_; }

    // Normalized kappa at an ambient point.
    double kappa(std::span<const double> z) const;
    // Rejection envelope: upper bound of kappa(phi(x)) D(x) over piece i.
    double envelope(std::size_t i) const { return envelopes_[i]; }

private:
    double kappa_unnormalized(std::span<const double> z) const;

    std::vector<AtlasPiece> pieces_;
    AtlasDensity density_;
    int ambient_dim_ = 0;
    int intrinsic_dim_ = 0;
    double normalizer_ = 1.0;  // integral of the unnormalized density
    double total_mass_ = 0.0;
    std::vector<double> masses_;
    std::vector<double> envelopes_;
};

ChartAtlas make_circle_atlas(double radius = 1.0, AtlasDensity density = {});
ChartAtlas make_torus_atlas(double major_radius, double minor_radius, AtlasDensity density = {});
ChartAtlas make_sphere_atlas(AtlasDensity density = {});

// Midpoint quadrature of f(x_param, z_ambient, D(x)) over the piece's
// effective domain.
double quadrature_over_piece(const AtlasPiece& piece,
                             const std::function<double(std::span<const double>, std::span<const double>, double)>& f,
                             int grid_per_axis);

struct ChartProbeReport {
    double min_singular_value = 0.0;
    double injectivity_ratio = 0.0;  // min ||phi(y)-phi(z)|| / ||y-z|| over probed pairs
};

// Samples the chart domain and checks the rank and injectivity invariants;
// throws degenerate_chart_error when either fails.
ChartProbeReport validate_chart(const Chart& chart, int probes = 256, std::uint64_t seed = 0x63686172ULL);

}  // namespace cechlab
