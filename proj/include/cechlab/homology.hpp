#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cechlab/cech.hpp"

namespace cechlab {

// Betti numbers over Z/2 (the only supported coefficient field).
struct BettiVector {
    static constexpr const char* field = "Z/2";
    std::vector<std::size_t> values;  // beta_0 .. beta_kmax

    std::size_t operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = std::numeric_limits<double>::infinity();  // +inf = never dies

    bool infinite() const { return death == std::numeric_limits<double>::infinity(); }
};

// Persistence intervals of dimensions 0..k_max from the standard column
// reduction of the boundary matrix in (value, dim, lex) order.
struct PersistenceDiagram {
    int k_max = 0;
    std::vector<PersistencePair> pairs;

    // beta_k of the subcomplex at threshold t.
    std::size_t betti_at(int k, double t) const;
    // rank of H_k(K_s) -> H_k(K_t).
    std::size_t persistent_betti(int k, double s, double t) const;
};

PersistenceDiagram persistence_diagram(const SimplicialComplex& complex, int k_max);

// beta_0..beta_kmax of the whole complex. The complex must contain its
// (k_max+1)-simplices: requesting k_max beyond the construction cap while
// the top dimension is populated raises insufficient_complex_error.
BettiVector betti_numbers(const SimplicialComplex& complex, int k_max);

// Number of connected components via union-find over the edges; agrees with
// beta_0 from matrix reduction on every complex.
std::size_t connected_components(const SimplicialComplex& complex);

// Alternating sum of simplex counts over every stored dimension.
long long euler_characteristic(const SimplicialComplex& complex);

// beta_k^{s,t} of the filtration; requires s <= t <= the filtration radius.
std::size_t persistent_betti(const SimplicialComplex& filtration, int k, double s, double t);

struct BettiDiffBound {
    std::size_t lhs = 0;  // |beta_k(super) - beta_k(sub)|
    long long rhs = 0;    // sum_{j=k}^{k+1} (S_j(super) - S_j(sub))
    bool holds = false;
};

// The simplex-count bound on Betti differences for nested complexes.
// Verifies sub is a subcomplex of super simplex-by-simplex.
BettiDiffBound betti_diff_bound_check(const SimplicialComplex& sub, const SimplicialComplex& super,
                                      int k);

}  // namespace cechlab
