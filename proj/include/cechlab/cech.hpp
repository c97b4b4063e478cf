#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cechlab/geometry.hpp"
#include "cechlab/sampling.hpp"

namespace cechlab {

// Dimension-graded simplicial complex with Cech filtration values.
// Simplices of dimension k are stored as flat, strictly increasing
// (k+1)-tuples of vertex indices; within a dimension they are sorted by
// (value, lexicographic vertices). Values are monotone under inclusion:
// value(face) <= value(coface) holds structurally, not just in exact
// arithmetic.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    std::size_t vertex_count() const { return vertex_count_; }
    // Construction cap (requested max dimension).
    int built_dim() const { return built_dim_; }
    // Highest dimension that actually holds a simplex (-1 when empty).
    int top_dim() const;
    double radius() const { return radius_; }

    std::size_t count(int k) const {
        return k >= 0 && k < static_cast<int>(tuples_.size()) ? values_[k].size() : 0;
    }
    std::size_t total_count() const;

    std::span<const std::uint32_t> simplex(int k, std::size_t i) const {
        return std::span<const std::uint32_t>(tuples_[k].data() + i * (k + 1),
                                              static_cast<std::size_t>(k) + 1);
    }
    double value(int k, std::size_t i) const { return values_[k][i]; }

    // Structural checks used by tests and file loaders: face closure,
    // strictly increasing tuples, monotone values.
    bool is_face_closed() const;

private:
    friend class ComplexBuilder;
    friend SimplicialComplex threshold_complex(const SimplicialComplex&, double);
    friend SimplicialComplex complex_from_simplices(
        std::size_t, int, double, std::vector<std::vector<std::uint32_t>>,
        std::vector<std::vector<double>>);

    std::size_t vertex_count_ = 0;
    int built_dim_ = -1;
    double radius_ = 0.0;
    std::vector<std::vector<std::uint32_t>> tuples_;  // per dimension, flat
    std::vector<std::vector<double>> values_;         // per dimension
};

// Assembles a complex from per-dimension tuple/value arrays (file loading,
// hand-built fixtures). Canonicalizes the per-dimension order.
SimplicialComplex complex_from_simplices(std::size_t vertex_count, int built_dim, double radius,
                                         std::vector<std::vector<std::uint32_t>> tuples,
                                         std::vector<std::vector<double>> values);

// Simplex cap: env CECHLAB_MAX_SIMPLICES overrides the 2e7 default.
std::size_t default_simplex_cap();

// Radius of the smallest enclosing Euclidean ball (Welzl, move-to-front).
double miniball_radius(std::span<const double> flat_points, int dim);

// Cech complex at radius r. Working coordinates are the whitened points for
// weighted norms, embedded points for chart-induced metrics, and the cloud
// itself for Euclidean; a (k+1)-subset enters iff its miniball radius is <= r
// (closed balls, no epsilon). max_dim caps the simplex dimension; pass a
// value >= cloud size - 1 for the full complex. simplex_cap = 0 uses the
// default cap.
SimplicialComplex cech_complex(const PointCloud& cloud, double r, const MetricSpec& metric,
                               int max_dim, std::size_t simplex_cap = 0);

// All simplices appearing at some radius <= r_max, each with its miniball
// radius as filtration value. Thresholding at any r <= r_max reproduces
// cech_complex(cloud, r, ...).
SimplicialComplex cech_filtration(const PointCloud& cloud, const MetricSpec& metric, int max_dim,
                                  double r_max, std::size_t simplex_cap = 0);

// Subcomplex of simplices with value <= r.
SimplicialComplex threshold_complex(const SimplicialComplex& filtration, double r);

// (S_0, ..., S_built_dim) with trailing zeros up to the construction cap
// (natural top dimension for uncapped builds).
std::vector<std::size_t> simplex_counts(const SimplicialComplex& complex);

}  // namespace cechlab
