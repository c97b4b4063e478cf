#pragma once

#include <cstdint>
#include <initializer_list>

namespace cechlab {

// Counter-based splittable generator built on the SplitMix64 output function.
// The i-th output is a pure function of (seed, i), so streams can be split by
// hashing the parent seed with a stream index and replayed from any point.
//
// The generator and both Poisson samplers below are part of the reproducibility
// contract: published seeds must regenerate identical point clouds, so none of
// these algorithms may change without a format version bump.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // SplitMix64 (Steele, Lea, Flood 2014).
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Poisson count with the pinned dispatch: sequential inversion for
    // mean < 30, Hormann's PTRD transformed rejection otherwise.
    std::uint64_t next_poisson(double mean);

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t poisson_inversion(double mean);
    std::uint64_t poisson_ptrd(double mean);

    std::uint64_t state_;
};

// Derives a child seed from a master seed and a path of stream indices,
// e.g. derive_seed(master, {r_index, trial}). Children of distinct paths
// are decorrelated by the SplitMix64 mixer.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

}  // namespace cechlab
