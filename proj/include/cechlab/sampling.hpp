#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cechlab/common.hpp"
#include "cechlab/geometry.hpp"

namespace cechlab {

// Density of the i.i.d. sequence: either uniform on a box (sampled directly)
// or an arbitrary nonnegative function with a support box and a sup bound,
// sampled by rejection against the flat envelope.
class DensitySpec {
public:
    static DensitySpec uniform_box(Box box);
    static DensitySpec callable(std::function<double(std::span<const double>)> f, Box support,
                                double sup_bound);

    bool is_uniform() const { return !f_; }
    const Box& support() const { return support_; }
    int dim() const { return support_.dim(); }
    double sup_bound() const { return sup_bound_; }
    double eval(std::span<const double> x) const { return f_ ? f_(x) : uniform_value_; }

private:
    DensitySpec() = default;
    std::function<double(std::span<const double>)> f_;
    Box support_;
    double sup_bound_ = 0.0;
    double uniform_value_ = 0.0;
};

enum class ProcessTag : std::uint8_t { binomial = 0, poissonized = 1, homogeneous = 2, manifold = 3 };

const char* to_string(ProcessTag tag);
ProcessTag process_tag_from_string(const std::string& s);

// Finite point set in R^d with seed provenance. Coordinates are stored in a
// flat row-major buffer; regeneration from (spec, seed) is bit-for-bit.
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(int dim, std::vector<double> flat, std::uint64_t master_seed, ProcessTag tag);

    int dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : flat_.size() / dim_; }
    bool empty() const { return flat_.empty(); }
    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(flat_.data() + i * dim_, dim_);
    }
    std::span<const double> flat() const { return flat_; }
    std::uint64_t master_seed() const { return master_seed_; }
    ProcessTag tag() const { return tag_; }

private:
    int dim_ = 0;
    std::vector<double> flat_;
    std::uint64_t master_seed_ = 0;
    ProcessTag tag_ = ProcessTag::binomial;
};

// Exactly n i.i.d. points from the density. Deterministic given the seed.
PointCloud sample_binomial(const DensitySpec& density, long n, std::uint64_t seed);

// Poissonized version: count N ~ Poisson(n), then the first N points of the
// same i.i.d. stream sample_binomial uses, realizing the coupling in which
// both clouds share their first min(n, N) points exactly.
struct PoissonizedCloud {
    PointCloud cloud;
    long n_used = 0;
};
PoissonizedCloud sample_poissonized(const DensitySpec& density, long n, std::uint64_t seed);

// Homogeneous Poisson process with the given intensity restricted to the
// window: count ~ Poisson(lambda * vol), locations i.i.d. uniform.
PointCloud sample_homogeneous(double lambda, const Box& window, std::uint64_t seed);

// Points on the manifold described by the atlas: a chart piece is selected
// with probability proportional to its mass, the parameter is drawn by
// rejection against kappa(phi(x)) D(x), and the embedded point is returned.
PointCloud sample_manifold(const ChartAtlas& atlas, long n, std::uint64_t seed,
                           bool poissonized = false, long* n_used = nullptr);

}  // namespace cechlab
