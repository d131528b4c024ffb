#pragma once

#include "protosel/linear_core.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace protosel {

// Affine polytope {y : A y <= b} recording a selection procedure's outcome.
struct SelectionEvent {
    Mat A;
    Vec b;
    std::string meta;

    int rows() const { return static_cast<int>(A.rows()); }
    bool satisfied(const Vec& y, double slack = 1e-8) const;
    static SelectionEvent stack(const std::vector<SelectionEvent>& events);
};

struct LassoSelection {
    int group = 0;
    double lambda = 0.0;
    std::vector<int> active;  // column indices into X_sub
    Vec signs;                // +-1 per active index
    Vec beta;                 // full coefficient vector at the solution
};

// Cyclic coordinate descent on (1/2)||y - X b||^2 + lambda ||b||_1; converged
// when the largest coefficient change in a sweep is below 1e-10.
LassoSelection lasso_fixed_lambda(const Mat& X_sub, const Vec& y, double lambda, int group = 0);

// Polyhedral characterization of the lasso outcome conditional on
// (active set, signs). Requires a nonempty active set of full column rank.
SelectionEvent lasso_event(const LassoSelection& sel, const Mat& X_sub, double lambda);

// Event for an empty active set: |x_j^T y| <= lambda for every column.
SelectionEvent lasso_null_event(const Mat& X_sub, double lambda);

struct ScreenResult {
    int i_star = -1;
    double sign = 1.0;
    bool tie = false;
    SelectionEvent event;
};

// Marginal screening i* = argmax_j |x_j^T y|, with the winning comparison
// rows rewritten as A y <= 0.
ScreenResult marginal_screen_event(const Mat& X, const Vec& y);

struct CalibrationResult {
    double lambda = 0.0;
    double mean_active = 0.0;
    bool warning = false;
};

// Bisection on lambda so that the mean active-set size over pilot null
// responses y* ~ N(0, sigma2 I) lands within +-1 of target_count. The pilot
// draws are independent of any test response.
CalibrationResult calibrate_lambda(const Mat& X_sub, int target_count, double sigma2, int trials,
                                   std::uint64_t seed);

}  // namespace protosel
