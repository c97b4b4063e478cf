#include "cechlab/sampling.hpp"

#include <cmath>

#include "cechlab/rng.hpp"

namespace cechlab {

namespace {

// Stream indices for substream derivation. The point stream must not be
// perturbed by count draws, otherwise the binomial/Poissonized coupling
// would not share its prefix.
constexpr std::uint64_t kPointStream = 1;
constexpr std::uint64_t kCountStream = 2;

// Rejection-rate guard: abort when the acceptance rate over a probe batch
// falls below this floor.
constexpr double kMinAcceptRate = 1e-4;
constexpr long kProbeBatch = 200000;

struct RejectionMonitor {
    long proposals = 0;
    long accepts = 0;

    void propose() { ++proposals; }
    void accept() { ++accepts; }
    void check(const char* who) const {
        if (proposals >= kProbeBatch &&
            static_cast<double>(accepts) < kMinAcceptRate * static_cast<double>(proposals))
            throw envelope_too_loose_error(std::string(who) +
                                           ": rejection acceptance rate below 1e-4, envelope too loose");
    }
};

void draw_uniform_in_box(Rng& rng, const Box& box, std::span<double> out) {
    for (int a = 0; a < box.dim(); ++a) out[a] = rng.next_in(box.lo[a], box.hi[a]);
}

// Appends `n` i.i.d. points of the density to `flat`, continuing the stream.
void draw_points(const DensitySpec& density, long n, Rng& rng, std::vector<double>& flat) {
    const int d = density.dim();
    std::vector<double> x(d);
    RejectionMonitor monitor;
    for (long i = 0; i < n; ++i) {
        if (density.is_uniform()) {
            draw_uniform_in_box(rng, density.support(), x);
        } else {
            for (;;) {
                monitor.propose();
                monitor.check("sample");
                draw_uniform_in_box(rng, density.support(), x);
                double u = rng.next_double();
                if (u * density.sup_bound() <= density.eval(x)) {
                    monitor.accept();
                    break;
                }
            }
        }
        flat.insert(flat.end(), x.begin(), x.end());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// DensitySpec

DensitySpec DensitySpec::uniform_box(Box box) {
    if (box.dim() < 1 || !(box.volume() > 0))
        throw invalid_density_error("uniform box density: empty support");
    DensitySpec d;
    d.uniform_value_ = 1.0 / box.volume();
    d.sup_bound_ = d.uniform_value_;
    d.support_ = std::move(box);
    return d;
}

DensitySpec DensitySpec::callable(std::function<double(std::span<const double>)> f, Box support,
                                  double sup_bound) {
    if (!f) throw invalid_density_error("callable density: null function");
    if (support.dim() < 1 || !(support.volume() > 0))
        throw invalid_density_error("callable density: empty support");
    if (!(sup_bound > 0)) throw invalid_density_error("callable density: sup bound must be positive");
    DensitySpec d;
    d.f_ = std::move(f);
    d.support_ = std::move(support);
    d.sup_bound_ = sup_bound;
    return d;
}

const char* to_string(ProcessTag tag) {
    switch (tag) {
        case ProcessTag::binomial: return "binomial";
        case ProcessTag::poissonized: return "poissonized";
        case ProcessTag::homogeneous: return "homogeneous";
        case ProcessTag::manifold: return "manifold";
    }
    return "unknown";
}

ProcessTag process_tag_from_string(const std::string& s) {
    if (s == "binomial") return ProcessTag::binomial;
    if (s == "poissonized") return ProcessTag::poissonized;
    if (s == "homogeneous") return ProcessTag::homogeneous;
    if (s == "manifold") return ProcessTag::manifold;
    throw std::invalid_argument("unknown process tag: " + s);
}

PointCloud::PointCloud(int dim, std::vector<double> flat, std::uint64_t master_seed, ProcessTag tag)
    : dim_(dim), flat_(std::move(flat)), master_seed_(master_seed), tag_(tag) {
    if (dim < 1) throw std::invalid_argument("PointCloud: dimension must be positive");
    if (flat_.size() % dim != 0)
        throw std::invalid_argument("PointCloud: buffer size not a multiple of the dimension");
}

// ---------------------------------------------------------------------------
// Samplers

PointCloud sample_binomial(const DensitySpec& density, long n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample_binomial: n must be nonnegative");
    Rng rng(derive_seed(seed, {kPointStream}));
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * density.dim());
    draw_points(density, n, rng, flat);
    return PointCloud(density.dim(), std::move(flat), seed, ProcessTag::binomial);
}

PoissonizedCloud sample_poissonized(const DensitySpec& density, long n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_poissonized: n must be positive");
    Rng count_rng(derive_seed(seed, {kCountStream}));
    const long n_used = static_cast<long>(count_rng.next_poisson(static_cast<double>(n)));
    Rng rng(derive_seed(seed, {kPointStream}));
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n_used) * density.dim());
    draw_points(density, n_used, rng, flat);
    return {PointCloud(density.dim(), std::move(flat), seed, ProcessTag::poissonized), n_used};
}

PointCloud sample_homogeneous(double lambda, const Box& window, std::uint64_t seed) {
    if (lambda < 0 || !std::isfinite(lambda))
        throw std::invalid_argument("sample_homogeneous: intensity must be nonnegative");
    const double vol = window.volume();
    if (!(vol > 0) || !std::isfinite(vol))
        throw std::invalid_argument("sample_homogeneous: window volume must be finite and positive");
    Rng count_rng(derive_seed(seed, {kCountStream}));
    const long count = static_cast<long>(count_rng.next_poisson(lambda * vol));
    Rng rng(derive_seed(seed, {kPointStream}));
    std::vector<double> flat(static_cast<std::size_t>(count) * window.dim());
    for (long i = 0; i < count; ++i)
        draw_uniform_in_box(rng, window, std::span<double>(flat.data() + i * window.dim(), window.dim()));
    return PointCloud(window.dim(), std::move(flat), seed, ProcessTag::homogeneous);
}

PointCloud sample_manifold(const ChartAtlas& atlas, long n, std::uint64_t seed, bool poissonized,
                           long* n_used_out) {
    if (n < 0) throw std::invalid_argument("sample_manifold: n must be nonnegative");
    if (std::abs(atlas.total_mass() - 1.0) > tolerances().quadrature_rel)
        throw invalid_density_error("sample_manifold: atlas density is not normalized");

    long count = n;
    if (poissonized) {
        if (n < 1) throw std::invalid_argument("sample_manifold: poissonized n must be positive");
        Rng count_rng(derive_seed(seed, {kCountStream}));
        count = static_cast<long>(count_rng.next_poisson(static_cast<double>(n)));
    }
    if (n_used_out) *n_used_out = count;

    Rng rng(derive_seed(seed, {kPointStream}));
    const int m = atlas.intrinsic_dim();
    const int nd = atlas.ambient_dim();
    const auto& masses = atlas.piece_masses();

    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(count) * nd);
    std::vector<double> x(m), z(nd);
    RejectionMonitor monitor;
    for (long i = 0; i < count; ++i) {
        // Piece selection by cumulative mass.
        double u = rng.next_double() * atlas.total_mass();
        std::size_t pi = 0;
        double cum = 0.0;
        for (; pi < masses.size(); ++pi) {
            cum += masses[pi];
            if (u <= cum) break;
        }
        if (pi == masses.size()) pi = masses.size() - 1;
        const AtlasPiece& piece = atlas.piece(pi);

        for (;;) {
            monitor.propose();
            monitor.check("sample_manifold");
            draw_uniform_in_box(rng, piece.effective_domain, x);
            if (!piece.chart->in_domain(x)) continue;
            piece.chart->embed_into(x, z);
            double target = atlas.kappa(z) * jacobian_density_unchecked(*piece.chart, x);
            if (rng.next_double() * atlas.envelope(pi) <= target) {
                monitor.accept();
                break;
            }
        }
        flat.insert(flat.end(), z.begin(), z.end());
    }
    return PointCloud(nd, std::move(flat), seed, ProcessTag::manifold);
}

}  // namespace cechlab
