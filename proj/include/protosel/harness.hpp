#pragma once

#include "protosel/estimation.hpp"
#include "protosel/multivariate.hpp"
#include "protosel/univariate.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace protosel {

struct ExperimentConfig {
    std::string id;

    // design
    int n = 100;
    std::vector<int> group_sizes = {50};
    double rho = 0.0;

    // response generator: linear y = X beta + eps, or prototype
    // y = G(theta)^{-1}(mu 1 + eps) with hats built on the full groups
    bool prototype_mode = false;
    Vec beta;
    Vec theta;
    double mu = 0.0;
    HatKind proto_kind = HatKind::least_squares;
    double sigma2 = 1.0;

    // tests
    bool multivariate = false;
    std::vector<std::string> methods;
    int tested_group = 0;
    std::vector<int> oracle_support;                // univariate LR-or columns
    std::vector<std::vector<int>> oracle_supports;  // multivariate per group

    // lasso penalties: fixed when > 0 / nonempty, otherwise calibrated once
    double fixed_lambda = 0.0;
    std::vector<double> fixed_lambdas;
    int lambda_target = 10;
    int lambda_trials = 100;
    double ridge_lambda = 10.0;  // LR-ridge / ridge prototype generator

    // sampler (per-replication seeds are derived from the experiment seed)
    int hr_samples = 10000;
    int hr_burnin = 2000;
    int hr_thinning = 1;
    bool smoothed_hr = false;

    int replications = 200;
    std::uint64_t seed = 20240101;
    int threads = 0;  // 0: all available (capped by PROTOSEL_THREADS)
};

struct ResultRow {
    std::string experiment_id;
    int replication = 0;
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    std::string flags;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
};

struct MethodSummary {
    std::string method;
    int n = 0;
    double power_05 = 0.0;
    double power_10 = 0.0;
    double ks_uniform_p = 0.0;
    std::vector<double> sorted_pvalues;
};

struct ExperimentSummary {
    std::string experiment_id;
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<double> lambdas_used;
    std::vector<MethodSummary> methods;
    double wall_seconds = 0.0;
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    ExperimentSummary summary;
};

// Columns are sqrt(rho) * group factor + sqrt(1-rho) * noise, standardized.
GroupedDesign generate_design(int n, const std::vector<int>& group_sizes, double rho,
                              std::uint64_t seed);

Vec generate_response_linear(const GroupedDesign& design, const Vec& beta, double sigma2,
                             std::uint64_t seed);
// Solves the recursive model: y = G(theta)^{-1} (mu 1 + eps).
Vec generate_response_prototype(const std::vector<HatOperator>& hats, const Vec& theta, double mu,
                                double sigma2, std::uint64_t seed, int n);

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

MethodSummary summarize_method(const std::string& method, const std::vector<ResultRow>& rows);

// Named configurations for the simulation studies; see preset_names().
ExperimentConfig make_preset(const std::string& name);
std::vector<std::string> preset_names();

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_summary_json(const std::string& path, const ExperimentSummary& summary);
void write_estimation_csv(const std::string& path, const std::vector<EstimationRow>& rows);

// CSV loading: X.csv has a header row and numeric cells; the response comes
// from a final column named y or from a separate single-column file. The
// groups file maps 1-based column_index to group_id with ids covering 1..K.
std::pair<GroupedDesign, Vec> load_dataset(const std::string& x_path,
                                           const std::string& groups_path,
                                           const std::string& y_path = "");
void save_dataset(const std::string& x_path, const std::string& groups_path,
                  const GroupedDesign& design, const Vec& y);

struct BenchConfig {
    std::vector<double> alphas = {0.05, 0.3};
    std::vector<int> ns = {100, 200, 500};
    int replications = 200;
    double rho = 0.3;
    std::uint64_t seed = 7;
};

struct BenchRow {
    double alpha = 0.0;
    int n = 0;
    double elr_naive_ms = 0.0;
    double elr_sm_ms = 0.0;
    double alr_ms = 0.0;
};

// Per-replication statistic timings: ELR with dense-LU inverse, ELR with the
// rank-one iterative inverse, ALR closed form.
std::vector<BenchRow> bench_statistics(const BenchConfig& cfg);

int resolve_threads(int requested);

}  // namespace protosel
