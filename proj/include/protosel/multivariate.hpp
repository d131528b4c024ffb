#pragma once

#include "protosel/likelihood.hpp"
#include "protosel/sampler.hpp"
#include "protosel/selection.hpp"
#include "protosel/univariate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace protosel {

// Nuisance-free null law of y given delta = P_{-1} y, realized as a
// constrained Gaussian in residual space: eps ~ N(0, sigma^2 I) under
// A_tilde eps <= b_tilde, mapped through y = (I - P_{-1}) eps + delta.
struct ConditionedNull {
    Mat p_basis;  // orthonormal basis of the non-tested groups' selected columns
    Vec delta;
    Mat a_tilde;
    Vec b_tilde;

    Vec project_out(const Vec& eps) const;  // (I - P_{-1}) eps + delta
};

ConditionedNull build_conditioned_null(const SelectionEvent& stacked, const Mat& nontested_columns,
                                       const Vec& y);

// tr(H_k H_l) Gram for the quadratic penalty term of the Taylor likelihood.
Mat alr_trace_gram(const std::vector<HatOperator>& hats);

// Closed-form approximate LR statistic for H0: theta_drop = 0.
double alr_multivariate(const Vec& y, const std::vector<HatOperator>& hats,
                        const std::vector<int>& sizes, double sigma2, int drop,
                        const Mat* trace_gram = nullptr);

struct ElrStatistic {
    double value = 0.0;
    bool converged = true;
    Vec theta_full;
    Vec theta_restricted;
};

// Exact LR statistic 2(max_theta l - max_{theta_drop=0} l); the inner Newton
// solves build G^{-1} by the iterative Sherman-Morrison updates.
ElrStatistic elr_multivariate(const Vec& y, const std::vector<HatOperator>& hats, double sigma2,
                              int drop, const Vec* warm_full = nullptr,
                              const Vec* warm_restricted = nullptr);

inline const std::vector<std::string> kMultivariateMethods = {
    "ALR-lasso", "ELR-lasso", "F", "ALR-all", "ALR-or", "F-all", "t-mean", "t-PC"};

struct MultivariateSetup {
    const GroupedDesign* design = nullptr;
    double sigma2 = 1.0;
    std::vector<double> lambdas;  // fixed per-group lasso penalties
    HitAndRunConfig hr;
    std::vector<std::vector<int>> oracle_supports;  // per group, for ALR-or
    bool smoothed_hr = false;
    int tested_group = 0;
};

std::vector<TestResult> run_multivariate_battery(const std::vector<std::string>& methods,
                                                 const MultivariateSetup& setup, const Vec& y);

TestResult run_multivariate_test(const std::string& method, const MultivariateSetup& setup,
                                 const Vec& y);

}  // namespace protosel
