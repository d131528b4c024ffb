#pragma once

#include "protosel/likelihood.hpp"
#include "protosel/sampler.hpp"
#include "protosel/selection.hpp"

#include <string>
#include <vector>

namespace protosel {

struct TestFlags {
    bool no_selection = false;
    bool non_converged = false;
    bool degenerate_window = false;
    bool tie = false;
    std::string to_string() const;
};

struct TestResult {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    std::string reference;  // "analytic" or "sampled(B,C,seed)"
    TestFlags flags;
};

// Exact LR statistic R = M log(M sigma^2) - M log(y'Hy) + y'Hy/sigma^2 - M.
double elr_statistic(const Vec& y, const HatOperator& H, int M, double sigma2);
// Approximate LR statistic ((y'Hy/sigma^2 - M)/sqrt(2M))^2.
double alr_statistic(const Vec& y, const HatOperator& H, int M, double sigma2);

// Single-group test roster. "F-classic" and "LR-ridge" are the non-selective
// pair used with ridge prototypes; the rest follow the lasso-prototype and
// screening procedures.
inline const std::vector<std::string> kUnivariateMethods = {
    "ELR-HR", "ELR-Chi", "ALR-HR", "ALR-Exact", "PT",     "F",
    "F-HR",   "LR-all",  "LR-or",  "t-mean",    "t-PC"};

struct UnivariateSetup {
    const GroupedDesign* design = nullptr;  // single group
    double sigma2 = 1.0;
    double lambda = 0.0;        // fixed lasso penalty for selective methods
    double ridge_lambda = 0.0;  // for LR-ridge
    HitAndRunConfig hr;
    std::vector<int> oracle_support;  // LR-or columns
    bool smoothed_hr = false;         // (#{R* > R} + 1)/(B + 1) instead of /B
};

// Runs the requested methods on one response, sharing the lasso selection,
// its polytope and a single hit-and-run chain across all sampled references.
std::vector<TestResult> run_univariate_battery(const std::vector<std::string>& methods,
                                               const UnivariateSetup& setup, const Vec& y);

TestResult run_univariate_test(const std::string& method, const UnivariateSetup& setup,
                               const Vec& y);

}  // namespace protosel
