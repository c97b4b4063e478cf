#include "cechlab/cech.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace cechlab {

namespace {

// ---------------------------------------------------------------------------
// Smallest enclosing ball: Welzl's algorithm with move-to-front reordering.
// Support balls are circumspheres within the affine hull of the support set,
// solved from the Gram system 2 G a = b.

class MiniballSolver {
public:
    explicit MiniballSolver(int dim) : d_(dim), center_(dim), support_((dim + 2) * dim) {}

    // Smallest ball over the given points; pts holds row pointers and is
    // permuted in place by the move-to-front heuristic.
    double run(std::vector<const double*>& pts) {
        pts_ = &pts;
        support_count_ = 0;
        mtf(pts.size());
        return radius_ < 0 ? 0.0 : radius_;
    }

private:
    // Computes the miniball of pts[0..n) constrained to have the current
    // support on its boundary. The ball found here must survive the caller's
    // pop_support, so the support ball is only (re)computed on entry.
    void mtf(std::size_t n) {
        ball_from_support();
        if (support_count_ == d_ + 1) return;
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = (*pts_)[i];
            if (!contains(p)) {
                push_support(p);
                mtf(i);
                pop_support();
                // Move-to-front: keep boundary-defining points early.
                std::rotate(pts_->begin(), pts_->begin() + i, pts_->begin() + i + 1);
            }
        }
    }

    bool contains(const double* p) const {
        if (radius_ < 0) return false;
        double s = 0.0;
        for (int a = 0; a < d_; ++a) {
            double t = p[a] - center_[a];
            s += t * t;
        }
        // Relative slack keeps small-radius balls at full relative precision.
        return s <= radius_sq_ * (1.0 + 1e-12) + 1e-300;
    }

    void push_support(const double* p) {
        std::copy(p, p + d_, support_.begin() + support_count_ * d_);
        ++support_count_;
    }
    void pop_support() { --support_count_; }

    // Circumsphere of the support points: c = p0 + sum a_i (p_i - p0) with
    // 2 (u_i . u_j) a_j = |u_i|^2. Tiny pivots (affinely dependent support)
    // zero out the corresponding coefficient.
    void ball_from_support() {
        const int k = support_count_;
        if (k == 0) {
            radius_ = -1.0;
            radius_sq_ = -1.0;
            return;
        }
        const double* p0 = support_.data();
        if (k == 1) {
            std::copy(p0, p0 + d_, center_.begin());
            radius_ = 0.0;
            radius_sq_ = 0.0;
            return;
        }
        const int m = k - 1;
        double g[kMaxSupport][kMaxSupport + 1];
        for (int i = 0; i < m; ++i) {
            const double* pi = support_.data() + (i + 1) * d_;
            double nn = 0.0;
            for (int a = 0; a < d_; ++a) {
                double ui = pi[a] - p0[a];
                nn += ui * ui;
            }
            for (int j = 0; j < m; ++j) {
                const double* pj = support_.data() + (j + 1) * d_;
                double dot = 0.0;
                for (int a = 0; a < d_; ++a) dot += (pi[a] - p0[a]) * (pj[a] - p0[a]);
                g[i][j] = 2.0 * dot;
            }
            g[i][m] = nn;
        }
        // Gaussian elimination with partial pivoting.
        int piv_rows[kMaxSupport];
        std::iota(piv_rows, piv_rows + m, 0);
        for (int c = 0; c < m; ++c) {
            int best = c;
            for (int r = c + 1; r < m; ++r)
                if (std::abs(g[piv_rows[r]][c]) > std::abs(g[piv_rows[best]][c])) best = r;
            std::swap(piv_rows[c], piv_rows[best]);
            double pv = g[piv_rows[c]][c];
            if (std::abs(pv) < 1e-30) {
                g[piv_rows[c]][c] = 1.0;
                g[piv_rows[c]][m] = 0.0;
                for (int cc = c + 1; cc < m; ++cc) g[piv_rows[c]][cc] = 0.0;
                pv = 1.0;
            }
            for (int r = c + 1; r < m; ++r) {
                double f = g[piv_rows[r]][c] / pv;
                if (f == 0.0) continue;
                for (int cc = c; cc <= m; ++cc) g[piv_rows[r]][cc] -= f * g[piv_rows[c]][cc];
            }
        }
        double alpha[kMaxSupport];
        for (int c = m - 1; c >= 0; --c) {
            double s = g[piv_rows[c]][m];
            for (int cc = c + 1; cc < m; ++cc) s -= g[piv_rows[c]][cc] * alpha[cc];
            alpha[c] = s / g[piv_rows[c]][c];
        }
        radius_sq_ = 0.0;
        for (int a = 0; a < d_; ++a) {
            double off = 0.0;
            for (int i = 0; i < m; ++i) off += alpha[i] * (support_[(i + 1) * d_ + a] - p0[a]);
            center_[a] = p0[a] + off;
            radius_sq_ += off * off;
        }
        radius_ = std::sqrt(radius_sq_);
    }

    static constexpr int kMaxSupport = 64;

    int d_;
    std::vector<const double*>* pts_ = nullptr;
    std::vector<double> center_;
    std::vector<double> support_;
    int support_count_ = 0;
    double radius_ = -1.0;
    double radius_sq_ = -1.0;
};

// ---------------------------------------------------------------------------
// Uniform hash grid over occupied cells. Cell size 2r makes the 3^N
// neighborhood of a point's cell a superset of everything within distance 2r.

std::uint64_t mix_u64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct NeighborGraph {
    // up[i] holds the neighbors j > i with dist(i, j) <= 2r, sorted.
    std::vector<std::vector<std::uint32_t>> up;
};

NeighborGraph build_neighbor_graph(const double* flat, int dim, std::size_t count, double r) {
    const double cell = 2.0 * r;
    std::vector<std::int64_t> cells(count * dim);
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    buckets.reserve(count * 2);
    auto key_of = [&](const std::int64_t* c) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int a = 0; a < dim; ++a) h = mix_u64(h ^ static_cast<std::uint64_t>(c[a]) * 0x100000001b3ULL);
        return h;
    };
    for (std::size_t i = 0; i < count; ++i) {
        for (int a = 0; a < dim; ++a)
            cells[i * dim + a] = static_cast<std::int64_t>(std::floor(flat[i * dim + a] / cell));
        buckets[key_of(cells.data() + i * dim)].push_back(static_cast<std::uint32_t>(i));
    }

    NeighborGraph graph;
    graph.up.resize(count);
    const double r2 = 4.0 * r * r;
    std::vector<std::int64_t> probe(dim);
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t* ci = cells.data() + i * dim;
        // Enumerate the 3^dim neighbor cells.
        std::vector<int> off(dim, -1);
        for (;;) {
            for (int a = 0; a < dim; ++a) probe[a] = ci[a] + off[a];
            auto it = buckets.find(key_of(probe.data()));
            if (it != buckets.end()) {
                for (std::uint32_t j : it->second) {
                    if (j <= i) continue;
                    // Guard against hash collisions: j must really live in
                    // the probed cell.
                    const std::int64_t* cj = cells.data() + j * static_cast<std::size_t>(dim);
                    bool same = true;
                    for (int a = 0; a < dim; ++a)
                        if (cj[a] != probe[a]) { same = false; break; }
                    if (!same) continue;
                    double s = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        double t = flat[i * dim + a] - flat[j * static_cast<std::size_t>(dim) + a];
                        s += t * t;
                    }
                    if (s <= r2) graph.up[i].push_back(j);
                }
            }
            int a = 0;
            while (a < dim && ++off[a] == 2) off[a++] = -1;
            if (a == dim) break;
        }
        std::sort(graph.up[i].begin(), graph.up[i].end());
    }
    return graph;
}

// Hash map from simplex tuple to its index within a dimension, with an
// overflow list so 64-bit key collisions stay exact.
class TupleIndex {
public:
    TupleIndex(const std::vector<std::uint32_t>* tuples, int k) : tuples_(tuples), k_(k) {}

    void reserve(std::size_t n) { map_.reserve(2 * n); }

    void insert(std::size_t idx) {
        auto [it, fresh] = map_.try_emplace(hash_at(idx), static_cast<std::uint32_t>(idx));
        if (!fresh) overflow_.emplace_back(hash_at(idx), static_cast<std::uint32_t>(idx));
    }

    // Returns the index of the tuple, or npos.
    std::uint32_t find(const std::uint32_t* tup) const {
        std::uint64_t h = hash_of(tup);
        auto it = map_.find(h);
        if (it != map_.end() && equals(it->second, tup)) return it->second;
        for (const auto& [oh, oi] : overflow_)
            if (oh == h && equals(oi, tup)) return oi;
        return npos;
    }

    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

private:
    std::uint64_t hash_of(const std::uint32_t* tup) const {
        std::uint64_t h = 0x2545f4914f6cdd1dULL;
        for (int a = 0; a <= k_; ++a) h = mix_u64(h ^ (static_cast<std::uint64_t>(tup[a]) + 0x9e37ULL));
        return h;
    }
    std::uint64_t hash_at(std::size_t idx) const { return hash_of(tuples_->data() + idx * (k_ + 1)); }
    bool equals(std::uint32_t idx, const std::uint32_t* tup) const {
        const std::uint32_t* s = tuples_->data() + static_cast<std::size_t>(idx) * (k_ + 1);
        for (int a = 0; a <= k_; ++a)
            if (s[a] != tup[a]) return false;
        return true;
    }

    const std::vector<std::uint32_t>* tuples_;
    int k_;
    std::unordered_map<std::uint64_t, std::uint32_t> map_;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> overflow_;
};

std::vector<double> working_coordinates(const PointCloud& cloud, const MetricSpec& metric) {
    if (cloud.dim() != metric.point_dim())
        throw std::invalid_argument("cech_complex: cloud dimension incompatible with metric");
    switch (metric.kind()) {
        case MetricSpec::Kind::euclidean:
        case MetricSpec::Kind::weighted_norm:
            return whiten(metric, cloud.flat());
        case MetricSpec::Kind::chart_induced: {
            const Chart& chart = metric.chart();
            std::vector<double> out;
            out.reserve(cloud.size() * chart.ambient_dim());
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                auto z = embed(chart, cloud.point(i));
                out.insert(out.end(), z.begin(), z.end());
            }
            return out;
        }
    }
    return {};
}

}  // namespace

// ---------------------------------------------------------------------------
// Builder

class ComplexBuilder {
public:
    static SimplicialComplex build(const std::vector<double>& flat, int dim, std::size_t count,
                                   double r_max, int max_dim, std::size_t cap) {
        SimplicialComplex cx;
        cx.vertex_count_ = count;
        cx.built_dim_ = max_dim;
        cx.radius_ = r_max;
        if (count == 0) return cx;

        std::size_t total = count;
        if (total > cap)
            throw resource_cap_error("cech: vertex count alone exceeds the simplex cap");

        cx.tuples_.resize(1);
        cx.values_.resize(1);
        cx.tuples_[0].resize(count);
        cx.values_[0].assign(count, 0.0);
        for (std::size_t i = 0; i < count; ++i) cx.tuples_[0][i] = static_cast<std::uint32_t>(i);
        if (max_dim == 0) return cx;

        NeighborGraph graph = build_neighbor_graph(flat.data(), dim, count, r_max);
        MiniballSolver solver(dim);
        std::vector<const double*> scratch;

        auto radius_of = [&](const std::uint32_t* tup, int k) {
            scratch.clear();
            for (int a = 0; a <= k; ++a) scratch.push_back(flat.data() + tup[a] * static_cast<std::size_t>(dim));
            return solver.run(scratch);
        };

        // Edges.
        cx.tuples_.resize(2);
        cx.values_.resize(2);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::uint32_t j : graph.up[i]) {
                std::uint32_t tup[2] = {static_cast<std::uint32_t>(i), j};
                double v = radius_of(tup, 1);
                if (v <= r_max) {
                    if (++total > cap) throw resource_cap_error("cech: simplex cap exceeded at dimension 1");
                    cx.tuples_[1].push_back(tup[0]);
                    cx.tuples_[1].push_back(tup[1]);
                    cx.values_[1].push_back(v);
                }
            }
        }

        // Higher dimensions by incremental expansion: extend each k-simplex
        // by common upper neighbors of all its vertices. A candidate enters
        // only if every facet is present; its value is the max of its own
        // miniball radius and all facet values, which keeps the filtration
        // monotone in floating point as well.
        std::vector<std::uint32_t> cand, next_cand, tau(2), facet;
        for (int k = 2; k <= max_dim; ++k) {
            const auto& prev_tuples = cx.tuples_[k - 1];
            const auto& prev_values = cx.values_[k - 1];
            const std::size_t prev_n = prev_values.size();
            if (prev_n == 0) break;

            TupleIndex prev_index(&prev_tuples, k - 1);
            prev_index.reserve(prev_n);
            for (std::size_t i = 0; i < prev_n; ++i) prev_index.insert(i);

            std::vector<std::uint32_t> tuples;
            std::vector<double> values;
            tau.resize(k + 1);
            facet.resize(k);

            for (std::size_t s = 0; s < prev_n; ++s) {
                const std::uint32_t* sig = prev_tuples.data() + s * k;
                // Intersect upper-neighbor lists, starting from the last
                // vertex so candidates exceed max(sigma).
                const auto& base = graph.up[sig[k - 1]];
                cand.assign(base.begin(), base.end());
                for (int a = 0; a < k - 1 && !cand.empty(); ++a) {
                    const auto& list = graph.up[sig[a]];
                    next_cand.clear();
                    for (std::uint32_t u : cand)
                        if (std::binary_search(list.begin(), list.end(), u)) next_cand.push_back(u);
                    cand.swap(next_cand);
                }
                for (std::uint32_t u : cand) {
                    for (int a = 0; a < k; ++a) tau[a] = sig[a];
                    tau[k] = u;
                    // Facet check: sigma itself is tau minus its last vertex;
                    // the rest are looked up.
                    double face_max = prev_values[s];
                    bool closed = true;
                    for (int drop = 0; drop < k && closed; ++drop) {
                        int w = 0;
                        for (int a = 0; a <= k; ++a)
                            if (a != drop) facet[w++] = tau[a];
                        std::uint32_t fi = prev_index.find(facet.data());
                        if (fi == TupleIndex::npos) {
                            closed = false;
                        } else {
                            face_max = std::max(face_max, prev_values[fi]);
                        }
                    }
                    if (!closed) continue;
                    double v = std::max(radius_of(tau.data(), k), face_max);
                    if (v <= r_max) {
                        if (++total > cap)
                            throw resource_cap_error("cech: simplex cap exceeded at dimension " +
                                                     std::to_string(k));
                        tuples.insert(tuples.end(), tau.begin(), tau.end());
                        values.push_back(v);
                    }
                }
            }
            if (values.empty()) break;
            cx.tuples_.push_back(std::move(tuples));
            cx.values_.push_back(std::move(values));
        }

        canonicalize(cx);
        return cx;
    }

    // Sorts every dimension by (value, lexicographic vertices).
    static void canonicalize(SimplicialComplex& cx) {
        for (int k = 1; k < static_cast<int>(cx.tuples_.size()); ++k) {
            const std::size_t n = cx.values_[k].size();
            std::vector<std::uint32_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            const auto& tu = cx.tuples_[k];
            const auto& va = cx.values_[k];
            const int w = k + 1;
            std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
                if (va[a] != va[b]) return va[a] < va[b];
                return std::lexicographical_compare(tu.begin() + a * w, tu.begin() + (a + 1) * w,
                                                    tu.begin() + b * w, tu.begin() + (b + 1) * w);
            });
            std::vector<std::uint32_t> new_tuples(tu.size());
            std::vector<double> new_values(n);
            for (std::size_t i = 0; i < n; ++i) {
                new_values[i] = va[order[i]];
                std::copy(tu.begin() + order[i] * w, tu.begin() + (order[i] + 1) * w,
                          new_tuples.begin() + i * w);
            }
            cx.tuples_[k] = std::move(new_tuples);
            cx.values_[k] = std::move(new_values);
        }
    }
};

// ---------------------------------------------------------------------------
// SimplicialComplex

int SimplicialComplex::top_dim() const {
    for (int k = static_cast<int>(tuples_.size()) - 1; k >= 0; --k)
        if (!values_[k].empty()) return k;
    return -1;
}

std::size_t SimplicialComplex::total_count() const {
    std::size_t t = 0;
    for (const auto& v : values_) t += v.size();
    return t;
}

bool SimplicialComplex::is_face_closed() const {
    for (int k = 1; k < static_cast<int>(tuples_.size()); ++k) {
        TupleIndex idx(&tuples_[k - 1], k - 1);
        idx.reserve(values_[k - 1].size());
        for (std::size_t i = 0; i < values_[k - 1].size(); ++i) idx.insert(i);
        std::vector<std::uint32_t> facet(k);
        for (std::size_t i = 0; i < values_[k].size(); ++i) {
            auto tup = simplex(k, i);
            for (int a = 1; a <= k; ++a)
                if (tup[a] <= tup[a - 1]) return false;
            for (int drop = 0; drop <= k; ++drop) {
                int w = 0;
                for (int a = 0; a <= k; ++a)
                    if (a != drop) facet[w++] = tup[a];
                std::uint32_t fi = idx.find(facet.data());
                if (fi == TupleIndex::npos) return false;
                if (values_[k - 1][fi] > values_[k][i]) return false;
            }
        }
    }
    return true;
}

SimplicialComplex complex_from_simplices(std::size_t vertex_count, int built_dim, double radius,
                                         std::vector<std::vector<std::uint32_t>> tuples,
                                         std::vector<std::vector<double>> values) {
    SimplicialComplex cx;
    cx.vertex_count_ = vertex_count;
    cx.built_dim_ = built_dim;
    cx.radius_ = radius;
    cx.tuples_ = std::move(tuples);
    cx.values_ = std::move(values);
    if (cx.tuples_.size() != cx.values_.size())
        throw std::invalid_argument("complex_from_simplices: tuple/value dimension mismatch");
    for (int k = 0; k < static_cast<int>(cx.tuples_.size()); ++k)
        if (cx.tuples_[k].size() != cx.values_[k].size() * (k + 1))
            throw std::invalid_argument("complex_from_simplices: malformed tuples at dimension " +
                                        std::to_string(k));
    ComplexBuilder::canonicalize(cx);
    return cx;
}

// ---------------------------------------------------------------------------
// Public operations

std::size_t default_simplex_cap() {
    static const std::size_t cap = [] {
        if (const char* env = std::getenv("CECHLAB_MAX_SIMPLICES")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(20'000'000);
    }();
    return cap;
}

double miniball_radius(std::span<const double> flat_points, int dim) {
    if (dim < 1) throw std::invalid_argument("miniball_radius: dimension must be positive");
    if (flat_points.empty()) throw std::invalid_argument("miniball_radius: empty input");
    if (flat_points.size() % dim != 0)
        throw std::invalid_argument("miniball_radius: buffer size not a multiple of the dimension");
    for (double x : flat_points)
        if (!std::isfinite(x)) throw std::invalid_argument("miniball_radius: non-finite coordinate");
    const std::size_t count = flat_points.size() / dim;
    std::vector<const double*> pts(count);
    for (std::size_t i = 0; i < count; ++i) pts[i] = flat_points.data() + i * dim;
    MiniballSolver solver(dim);
    return solver.run(pts);
}

SimplicialComplex cech_complex(const PointCloud& cloud, double r, const MetricSpec& metric,
                               int max_dim, std::size_t simplex_cap) {
    if (!(r > 0)) throw std::invalid_argument("cech_complex: radius must be positive");
    if (max_dim < 0) throw std::invalid_argument("cech_complex: max_dim must be nonnegative");
    std::vector<double> work = working_coordinates(cloud, metric);
    const int wd = cloud.size() == 0 ? cloud.dim() : static_cast<int>(work.size() / cloud.size());
    return ComplexBuilder::build(work, wd, cloud.size(), r, max_dim,
                                 simplex_cap ? simplex_cap : default_simplex_cap());
}

SimplicialComplex cech_filtration(const PointCloud& cloud, const MetricSpec& metric, int max_dim,
                                  double r_max, std::size_t simplex_cap) {
    return cech_complex(cloud, r_max, metric, max_dim, simplex_cap);
}

SimplicialComplex threshold_complex(const SimplicialComplex& filtration, double r) {
    SimplicialComplex out;
    out.vertex_count_ = filtration.vertex_count();
    out.built_dim_ = filtration.built_dim();
    out.radius_ = r;
    for (int k = 0; k < static_cast<int>(filtration.tuples_.size()); ++k) {
        // Values are sorted within a dimension, so the kept set is a prefix.
        const auto& va = filtration.values_[k];
        auto it = std::upper_bound(va.begin(), va.end(), r);
        std::size_t keep = static_cast<std::size_t>(it - va.begin());
        if (keep == 0) break;
        out.tuples_.emplace_back(filtration.tuples_[k].begin(),
                                 filtration.tuples_[k].begin() + keep * (k + 1));
        out.values_.emplace_back(va.begin(), va.begin() + keep);
    }
    return out;
}

std::vector<std::size_t> simplex_counts(const SimplicialComplex& complex) {
    const int top = complex.top_dim();
    long long len = std::min<long long>(complex.built_dim(), static_cast<long long>(top) + 1) + 1;
    if (len < 1) len = 1;
    std::vector<std::size_t> counts(static_cast<std::size_t>(len), 0);
    for (int k = 0; k < static_cast<int>(counts.size()); ++k) counts[k] = complex.count(k);
    return counts;
}

}  // namespace cechlab
