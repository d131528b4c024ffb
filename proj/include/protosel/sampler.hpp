#pragma once

#include "protosel/rng.hpp"
#include "protosel/selection.hpp"

#include <cstdint>
#include <utility>

namespace protosel {

struct HitAndRunConfig {
    int n_samples = 50000;
    int burn_in = 10000;
    std::uint64_t seed = 0;
    int thinning = 1;
};

// Gaussian N(mean, Sigma) restricted to a polytope; Sigma given by its
// symmetric square root, or iso_scale * I when cov_sqrt is empty.
struct ConstrainedGaussian {
    Vec mean;
    Mat cov_sqrt;       // n x n symmetric square root; empty => identity tag
    double iso_scale = 1.0;
    SelectionEvent event;
};

// Feasible interval (V-, V+) for the new value of z^T y along the chord
// y(kappa) = y + (kappa - z^T y) z. Rows with |A z| < 1e-12 are ignored.
std::pair<double, double> chord_interval(const Mat& A, const Vec& b, const Vec& y, const Vec& z);

// One N(0,1) variate restricted to [lo, hi]; inverse-CDF, switching to
// log-survival space for windows deep in a tail.
double truncated_std_normal(double lo, double hi, RandomStream& rng);

// Hit-and-run chain; returns B samples (rows), every one inside the polytope.
Mat hit_and_run(const ConstrainedGaussian& target, const Vec& start, const HitAndRunConfig& cfg);

}  // namespace protosel
