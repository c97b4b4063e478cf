#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cechlab/errors.hpp"

namespace cechlab {

// Numeric tolerances used throughout the library. Centralized so the
// contracts stated in docs and tests reference a single source.
struct Tolerances {
    double rank_cutoff = 1e-8;        // smallest singular value for a full-rank Jacobian
    double metric_check = 1e-9;       // symmetry/triangle-inequality slack
    double surface_residual = 1e-9;   // implicit-equation residual for manifold samples
    double quadrature_rel = 1e-3;     // atlas mass normalization / grid convergence
    double fd_step = 1e-6;            // central-difference step for user-supplied charts
};

inline const Tolerances& tolerances() {
    static const Tolerances tol{};
    return tol;
}

// Axis-aligned box in R^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw std::invalid_argument("Box: lo/hi dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw std::invalid_argument("Box: lo > hi on axis " + std::to_string(i));
    }

    int dim() const { return static_cast<int>(lo.size()); }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    bool contains(std::span<const double> p, double slack = 0.0) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        return true;
    }

    static Box unit(int d) {
        return Box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
    }

    // Cube of volume `vol` centered at the origin.
    static Box centered_cube(int d, double vol) {
        double side = std::pow(vol, 1.0 / d);
        return Box(std::vector<double>(d, -side / 2), std::vector<double>(d, side / 2));
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

// Volume of the unit ball in R^m, via the Gamma-function formula.
inline double unit_ball_volume(int m) {
    if (m < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
    return std::pow(M_PI, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
}

// Mean and standard error (sample sd / sqrt(count)) of a sample.
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr out;
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            double d = x - out.mean;
            ss += d * d;
        }
        double var = ss / static_cast<double>(xs.size() - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return out;
}

}  // namespace cechlab
