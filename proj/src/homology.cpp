#include "cechlab/homology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace cechlab {

namespace {

std::uint64_t mix_u64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t tuple_hash(const std::uint32_t* tup, int len) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (int a = 0; a < len; ++a) h = mix_u64(h ^ (static_cast<std::uint64_t>(tup[a]) + 0x9e37ULL));
    return h;
}

// Exact tuple -> per-dimension index map (collisions resolved by comparing).
class FaceMap {
public:
    FaceMap(const SimplicialComplex& cx, int k) : cx_(&cx), k_(k) {
        map_.reserve(2 * cx.count(k));
        for (std::size_t i = 0; i < cx.count(k); ++i) {
            std::uint64_t h = tuple_hash(cx.simplex(k, i).data(), k + 1);
            auto [it, fresh] = map_.try_emplace(h, static_cast<std::uint32_t>(i));
            if (!fresh) overflow_.emplace_back(h, static_cast<std::uint32_t>(i));
        }
    }

    std::uint32_t find(const std::uint32_t* tup) const {
        std::uint64_t h = tuple_hash(tup, k_ + 1);
        auto it = map_.find(h);
        if (it != map_.end() && equals(it->second, tup)) return it->second;
        for (const auto& [oh, oi] : overflow_)
            if (oh == h && equals(oi, tup)) return oi;
        return npos;
    }

    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

private:
    bool equals(std::uint32_t idx, const std::uint32_t* tup) const {
        auto s = cx_->simplex(k_, idx);
        for (int a = 0; a <= k_; ++a)
            if (s[a] != tup[a]) return false;
        return true;
    }

    const SimplicialComplex* cx_;
    int k_;
    std::unordered_map<std::uint64_t, std::uint32_t> map_;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> overflow_;
};

// Reduction of one boundary matrix d_q. Within a dimension the complex is
// already in filtration order, which restricted to a single dimension is the
// global (value, dim, lex) order, so per-dimension indices serve as pivots.
struct ReductionResult {
    // pairs[j] = facet index killed by column j, or npos when j is positive.
    std::vector<std::uint32_t> pivot_of_column;
    // paired_facet[i] = true when facet i is some column's pivot.
    std::vector<bool> paired_facet;
};

ReductionResult reduce_boundary(const SimplicialComplex& cx, int q) {
    const std::size_t cols = cx.count(q);
    const std::size_t rows = cx.count(q - 1);
    ReductionResult out;
    out.pivot_of_column.assign(cols, FaceMap::npos);
    out.paired_facet.assign(rows, false);
    if (cols == 0 || rows == 0) return out;

    FaceMap faces(cx, q - 1);
    std::vector<std::vector<std::uint32_t>> reduced(cols);
    std::vector<std::uint32_t> owner(rows, FaceMap::npos);

    std::vector<std::uint32_t> facet(q);
    std::vector<std::uint32_t> col, merged;
    for (std::size_t j = 0; j < cols; ++j) {
        auto tup = cx.simplex(q, j);
        col.clear();
        for (int drop = 0; drop <= q; ++drop) {
            int w = 0;
            for (int a = 0; a <= q; ++a)
                if (a != drop) facet[w++] = tup[a];
            std::uint32_t fi = faces.find(facet.data());
            if (fi == FaceMap::npos)
                throw insufficient_complex_error("homology: complex is not face-closed");
            col.push_back(fi);
        }
        std::sort(col.begin(), col.end());

        while (!col.empty()) {
            std::uint32_t low = col.back();
            std::uint32_t own = owner[low];
            if (own == FaceMap::npos) {
                owner[low] = static_cast<std::uint32_t>(j);
                out.pivot_of_column[j] = low;
                out.paired_facet[low] = true;
                break;
            }
            // Z/2 column addition: symmetric difference of sorted index lists.
            const auto& other = reduced[own];
            merged.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(merged));
            col.swap(merged);
        }
        reduced[j] = col;
    }
    return out;
}

// The reductions needed to answer Betti queries for dimensions 0..k_max:
// positivity of k-columns and the pairs made by (k+1)-columns.
struct ReductionSet {
    int k_max = 0;
    std::vector<ReductionResult> by_dim;  // entry q holds reduce_boundary(cx, q), q = 1..k_max+1
};

void ensure_complex_sufficient(const SimplicialComplex& cx, int k_max) {
    if (k_max < 0) throw std::invalid_argument("betti: k_max must be nonnegative");
    // Asking for beta_k needs the (k+1)-columns. If the build was capped at
    // the requested dimension or below while its top level is populated, the
    // missing boundaries could change the answer.
    if (k_max + 1 > cx.built_dim() && cx.built_dim() >= 0 && cx.count(cx.built_dim()) > 0)
        throw insufficient_complex_error(
            "betti: complex built to dimension " + std::to_string(cx.built_dim()) +
            " cannot answer k_max = " + std::to_string(k_max) + "; build to k_max+1");
}

ReductionSet reduce_up_to(const SimplicialComplex& cx, int k_max) {
    ReductionSet set;
    set.k_max = k_max;
    set.by_dim.resize(static_cast<std::size_t>(k_max) + 2);
    for (int q = 1; q <= k_max + 1; ++q) set.by_dim[q] = reduce_boundary(cx, q);
    return set;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t PersistenceDiagram::betti_at(int k, double t) const {
    std::size_t n = 0;
    for (const auto& p : pairs)
        if (p.dim == k && p.birth <= t && p.death > t) ++n;
    return n;
}

std::size_t PersistenceDiagram::persistent_betti(int k, double s, double t) const {
    std::size_t n = 0;
    for (const auto& p : pairs)
        if (p.dim == k && p.birth <= s && p.death > t) ++n;
    return n;
}

PersistenceDiagram persistence_diagram(const SimplicialComplex& complex, int k_max) {
    ensure_complex_sufficient(complex, k_max);
    PersistenceDiagram dg;
    dg.k_max = k_max;
    ReductionSet set = reduce_up_to(complex, k_max);
    for (int k = 0; k <= k_max; ++k) {
        const std::size_t n_k = complex.count(k);
        const auto& own = set.by_dim[k];          // reduction of d_k (k = 0: unused)
        const auto& killer = set.by_dim[k + 1];   // reduction of d_{k+1}

        // Deaths: pivots of (k+1)-columns pair a positive k-simplex.
        for (std::size_t j = 0; j < killer.pivot_of_column.size(); ++j) {
            std::uint32_t low = killer.pivot_of_column[j];
            if (low == FaceMap::npos) continue;
            dg.pairs.push_back(
                {k, complex.value(k, low), complex.value(k + 1, static_cast<std::size_t>(j))});
        }
        // Survivors: positive k-simplices never used as a pivot.
        for (std::size_t i = 0; i < n_k; ++i) {
            bool positive = (k == 0) || (own.pivot_of_column[i] == FaceMap::npos);
            bool paired = i < killer.paired_facet.size() && killer.paired_facet[i];
            if (positive && !paired) dg.pairs.push_back({k, complex.value(k, i),
                                                         std::numeric_limits<double>::infinity()});
        }
    }
    return dg;
}

BettiVector betti_numbers(const SimplicialComplex& complex, int k_max) {
    ensure_complex_sufficient(complex, k_max);
    ReductionSet set = reduce_up_to(complex, k_max);
    BettiVector bv;
    bv.values.resize(static_cast<std::size_t>(k_max) + 1, 0);
    for (int k = 0; k <= k_max; ++k) {
        const std::size_t n_k = complex.count(k);
        std::size_t rank_dk = 0;       // rank of d_k
        std::size_t rank_dk1 = 0;      // rank of d_{k+1}
        if (k >= 1)
            for (std::uint32_t p : set.by_dim[k].pivot_of_column)
                if (p != FaceMap::npos) ++rank_dk;
        for (std::uint32_t p : set.by_dim[k + 1].pivot_of_column)
            if (p != FaceMap::npos) ++rank_dk1;
        bv.values[k] = n_k - rank_dk - rank_dk1;
    }
    return bv;
}

std::size_t connected_components(const SimplicialComplex& complex) {
    const std::size_t n = complex.vertex_count();
    if (n == 0) return 0;
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::uint32_t> rank(n, 0);

    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t e = 0; e < complex.count(1); ++e) {
        auto tup = complex.simplex(1, e);
        std::uint32_t a = find(tup[0]), b = find(tup[1]);
        if (a == b) continue;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    }
    std::size_t components = 0;
    for (std::uint32_t v = 0; v < n; ++v)
        if (find(v) == v) ++components;
    return components;
}

long long euler_characteristic(const SimplicialComplex& complex) {
    long long chi = 0;
    for (int k = 0; k <= complex.top_dim(); ++k)
        chi += (k % 2 == 0 ? 1LL : -1LL) * static_cast<long long>(complex.count(k));
    return chi;
}

std::size_t persistent_betti(const SimplicialComplex& filtration, int k, double s, double t) {
    if (s > t) throw std::invalid_argument("persistent_betti: need s <= t");
    if (t > filtration.radius())
        throw std::invalid_argument("persistent_betti: t exceeds the filtration radius");
    return persistence_diagram(filtration, k).persistent_betti(k, s, t);
}

BettiDiffBound betti_diff_bound_check(const SimplicialComplex& sub, const SimplicialComplex& super,
                                      int k) {
    if (k < 0) throw std::invalid_argument("betti_diff_bound_check: k must be nonnegative");
    if (sub.vertex_count() > super.vertex_count())
        throw std::invalid_argument("betti_diff_bound_check: sub has more vertices than super");
    // Containment, simplex by simplex.
    for (int q = 1; q <= sub.top_dim(); ++q) {
        if (sub.count(q) == 0) continue;
        if (super.count(q) < sub.count(q))
            throw std::invalid_argument("betti_diff_bound_check: sub is not contained in super");
        FaceMap map(super, q);
        for (std::size_t i = 0; i < sub.count(q); ++i)
            if (map.find(sub.simplex(q, i).data()) == FaceMap::npos)
                throw std::invalid_argument("betti_diff_bound_check: sub is not contained in super");
    }

    BettiDiffBound out;
    const std::size_t beta_sub = betti_numbers(sub, k).values[k];
    const std::size_t beta_super = betti_numbers(super, k).values[k];
    out.lhs = beta_super > beta_sub ? beta_super - beta_sub : beta_sub - beta_super;
    out.rhs = 0;
    for (int j = k; j <= k + 1; ++j)
        out.rhs += static_cast<long long>(super.count(j)) - static_cast<long long>(sub.count(j));
    out.holds = static_cast<long long>(out.lhs) <= out.rhs;
    return out;
}

}  // namespace cechlab
