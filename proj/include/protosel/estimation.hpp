#pragma once

#include "protosel/likelihood.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace protosel {

// Penalized fit: minimize ||y - Yhat theta||^2/(2 sigma^2) - log|G(theta)|
// over the semidefinite cone, intercept profiled. Identical machinery to the
// MLE (the penalty IS the log-likelihood's normalizing term).
FitResult fit_prototype_penalized(const std::vector<HatOperator>& hats, const Vec& y,
                                  double sigma2, bool with_intercept);

// 10-fold CV lasso (intercept via centering, per-fit column standardization);
// plain minimum-CV lambda, seeded folds.
struct CvLassoResult {
    std::vector<int> support;
    double lambda = 0.0;
};
CvLassoResult cv_lasso_min(const Mat& X, const Vec& y, int folds, std::uint64_t seed);

inline const std::vector<std::string> kEstimators = {"LPML-M", "LPML-L", "LSL",    "LSL-O",
                                                     "OPML",   "SOPML-M", "SOPML-L"};

struct EstimationCell {
    std::string sparsity_name;  // "eq" or "uneq"
    std::vector<int> sparsity;  // non-null count per group (leading columns)
    Vec theta;
    double mu = 0.0;
    double rho = 0.0;
};

struct EstimationRow {
    std::string cell;
    std::string estimator;
    int replication = 0;
    double mse = 0.0;
    double ratio_vs_lpml_m = 0.0;
};

struct EstimationConfig {
    int n = 100;
    int n_groups = 4;
    int group_size = 25;
    double sigma2 = 1.0;
    int replications = 120;
    int cv_folds = 10;
    std::uint64_t seed = 1;
};

// One grid cell: B replications of (y_train, y_test) from the prototype
// model with the cell's true hats; every estimator's test MSE per replication.
std::vector<EstimationRow> run_estimation_cell(const EstimationConfig& cfg,
                                               const EstimationCell& cell);

// The full simulation grid (2 sparsity patterns x 5 theta x 2 mu x 2 rho).
std::vector<EstimationRow> run_estimation_experiment(const EstimationConfig& cfg);

std::vector<EstimationCell> estimation_grid();

}  // namespace protosel
