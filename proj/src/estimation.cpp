#include "protosel/estimation.hpp"

#include "protosel/rng.hpp"
#include "protosel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace protosel {

FitResult fit_prototype_penalized(const std::vector<HatOperator>& hats, const Vec& y,
                                  double sigma2, bool with_intercept) {
    PrototypeLikelihood pl(hats, y, sigma2, with_intercept);
    return pl.fit_mle();
}

namespace {

struct FoldStandardized {
    Mat X;
    Vec y;
    Vec col_means, col_scales;
    double y_mean = 0.0;
};

FoldStandardized standardize_fit(const Mat& X, const Vec& y, const std::vector<int>& rows) {
    FoldStandardized out;
    const int m = static_cast<int>(X.cols());
    out.X.resize(rows.size(), m);
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(i) = X.row(rows[i]);
        out.y[i] = y[rows[i]];
    }
    out.y_mean = out.y.mean();
    out.y.array() -= out.y_mean;
    out.col_means.resize(m);
    out.col_scales.resize(m);
    for (int j = 0; j < m; ++j) {
        out.col_means[j] = out.X.col(j).mean();
        out.X.col(j).array() -= out.col_means[j];
        out.col_scales[j] = out.X.col(j).norm();
        if (out.col_scales[j] < 1e-12) out.col_scales[j] = 1.0;
        out.X.col(j) /= out.col_scales[j];
    }
    return out;
}

// lasso path by warm-started coordinate descent on standardized data
std::vector<Vec> lasso_path(const Mat& X, const Vec& y, const std::vector<double>& lambdas) {
    const int m = static_cast<int>(X.cols());
    Vec beta = Vec::Zero(m);
    Vec resid = y;
    Vec col_sq = X.colwise().squaredNorm();
    std::vector<Vec> path;
    path.reserve(lambdas.size());
    for (double lambda : lambdas) {
        for (int sweep = 0; sweep < 5000; ++sweep) {
            double max_delta = 0.0;
            for (int j = 0; j < m; ++j) {
                if (col_sq[j] <= 0.0) continue;
                double bj = beta[j];
                double rho = X.col(j).dot(resid) + col_sq[j] * bj;
                double bj_new;
                if (rho > lambda)
                    bj_new = (rho - lambda) / col_sq[j];
                else if (rho < -lambda)
                    bj_new = (rho + lambda) / col_sq[j];
                else
                    bj_new = 0.0;
                if (bj_new != bj) {
                    resid += X.col(j) * (bj - bj_new);
                    beta[j] = bj_new;
                }
                max_delta = std::max(max_delta, std::fabs(bj_new - bj));
            }
            if (max_delta < 1e-8) break;
        }
        path.push_back(beta);
    }
    return path;
}

}  // namespace

CvLassoResult cv_lasso_min(const Mat& X, const Vec& y, int folds, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(X.cols());

    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    FoldStandardized full = standardize_fit(X, y, all_rows);
    double lam_max = (full.X.transpose() * full.y).cwiseAbs().maxCoeff();
    const int n_lambda = 60;
    std::vector<double> lambdas(n_lambda);
    for (int i = 0; i < n_lambda; ++i)
        lambdas[i] = lam_max * std::pow(1e-3, static_cast<double>(i) / (n_lambda - 1));

    // seeded fold assignment
    std::vector<int> fold_of(n);
    {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        RandomStream rs(derive_seed(seed, {0xCFu}));
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(rs.raw() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;
    }

    std::vector<double> cv_err(n_lambda, 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, val;
        for (int i = 0; i < n; ++i) (fold_of[i] == f ? val : train).push_back(i);
        if (train.empty() || val.empty()) continue;
        FoldStandardized fs = standardize_fit(X, y, train);
        // fold lambdas on the fold's own scale
        double fold_max = (fs.X.transpose() * fs.y).cwiseAbs().maxCoeff();
        std::vector<double> fold_lams(n_lambda);
        for (int i = 0; i < n_lambda; ++i)
            fold_lams[i] = fold_max * std::pow(1e-3, static_cast<double>(i) / (n_lambda - 1));
        std::vector<Vec> path = lasso_path(fs.X, fs.y, fold_lams);
        for (int li = 0; li < n_lambda; ++li) {
            for (int row : val) {
                double pred = fs.y_mean;
                for (int j = 0; j < m; ++j)
                    if (path[li][j] != 0.0)
                        pred += path[li][j] * (X(row, j) - fs.col_means[j]) / fs.col_scales[j];
                double e = y[row] - pred;
                cv_err[li] += e * e;
            }
        }
    }
    int best = static_cast<int>(std::min_element(cv_err.begin(), cv_err.end()) - cv_err.begin());

    std::vector<Vec> final_path = lasso_path(full.X, full.y, lambdas);
    CvLassoResult out;
    out.lambda = lambdas[best];
    for (int j = 0; j < m; ++j)
        if (final_path[best][j] != 0.0) out.support.push_back(j);
    return out;
}

std::vector<EstimationCell> estimation_grid() {
    std::vector<EstimationCell> grid;
    const std::vector<std::pair<std::string, std::vector<int>>> sparsities = {
        {"eq", {3, 3, 3, 3}}, {"uneq", {10, 5, 5, 3}}};
    std::vector<std::pair<std::string, Vec>> thetas;
    thetas.push_back({"theta0", Vec::Zero(4)});
    thetas.push_back({"theta0.2", Vec::Constant(4, 0.2)});
    thetas.push_back({"theta0.4", Vec::Constant(4, 0.4)});
    Vec up(4);
    up << 0.0, 0.0, 0.2, 0.5;
    thetas.push_back({"theta-incr", up});
    Vec down(4);
    down << 0.5, 0.2, 0.0, 0.0;
    thetas.push_back({"theta-decr", down});
    for (const auto& [sname, spat] : sparsities)
        for (const auto& [tname, theta] : thetas)
            for (double mu : {0.0, 2.0})
                for (double rho : {0.0, 0.3}) {
                    EstimationCell cell;
                    cell.sparsity_name = sname;
                    cell.sparsity = spat;
                    cell.theta = theta;
                    cell.mu = mu;
                    cell.rho = rho;
                    grid.push_back(cell);
                }
    return grid;
}

namespace {

Vec solve_g(const std::vector<HatOperator>& hats, const Vec& theta, const Vec& rhs) {
    GTheta g(theta, hats);
    Mat ginv = sherman_morrison_inverse(g);
    return ginv * rhs;
}

// draw y from the prototype model y = G(theta)^{-1}(mu 1 + eps)
Vec prototype_draw(const std::vector<HatOperator>& hats, const Vec& theta, double mu,
                   double sigma2, RandomStream& rs, int n) {
    Vec eps(n);
    double sigma = std::sqrt(sigma2);
    for (int i = 0; i < n; ++i) eps[i] = mu + sigma * rs.normal();
    return solve_g(hats, theta, eps);
}

std::string cell_tag(const EstimationCell& c) {
    std::string tag = c.sparsity_name;
    for (int i = 0; i < c.theta.size(); ++i)
        tag += "/" + std::to_string(c.theta[i]).substr(0, 4);
    tag += "/mu" + std::to_string(c.mu).substr(0, 3) + "/rho" + std::to_string(c.rho).substr(0, 3);
    return tag;
}

}  // namespace

std::vector<EstimationRow> run_estimation_cell(const EstimationConfig& cfg,
                                               const EstimationCell& cell) {
    const int K = cfg.n_groups, gs = cfg.group_size, n = cfg.n;
    const int p = K * gs;

    // design: within-group equicorrelated columns, standardized
    std::uint64_t cell_seed =
        derive_seed(cfg.seed, {std::hash<std::string>{}(cell_tag(cell))});
    RandomStream xs(derive_seed(cell_seed, {0x0Du}));
    Mat raw(n, p);
    for (int k = 0; k < K; ++k) {
        Vec shared(n);
        for (int i = 0; i < n; ++i) shared[i] = xs.normal();
        for (int j = 0; j < gs; ++j) {
            for (int i = 0; i < n; ++i)
                raw(i, k * gs + j) =
                    std::sqrt(cell.rho) * shared[i] + std::sqrt(1.0 - cell.rho) * xs.normal();
        }
    }
    std::vector<std::vector<int>> groups(K);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < gs; ++j) groups[k].push_back(k * gs + j);
    GroupedDesign design = GroupedDesign::standardize(std::move(raw), groups);

    // true hats from the designated non-null columns
    std::vector<HatOperator> true_hats;
    std::vector<std::vector<int>> true_supports(K);
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < cell.sparsity[k]; ++j) true_supports[k].push_back(k * gs + j);
        true_hats.push_back(make_hat(design.columns(true_supports[k]), HatKind::least_squares));
    }

    std::vector<EstimationRow> rows(cfg.replications * kEstimators.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int b = 0; b < cfg.replications; ++b) {
        RandomStream rs(derive_seed(cell_seed, {0xEEu, static_cast<std::uint64_t>(b)}));
        Vec y_train = prototype_draw(true_hats, cell.theta, cell.mu, cfg.sigma2, rs, n);
        Vec y_test = prototype_draw(true_hats, cell.theta, cell.mu, cfg.sigma2, rs, n);
        double y_train_mean = y_train.mean();

        auto mse = [&](const Vec& pred) { return (y_test - pred).squaredNorm() / n; };
        std::vector<double> mses(kEstimators.size(), 0.0);

        // LPML: per-group CV lasso supports, then the penalized ML fit
        std::vector<HatOperator> lpml_hats;
        Vec ones = Vec::Ones(n);
        for (int k = 0; k < K; ++k) {
            CvLassoResult cv = cv_lasso_min(design.group_columns(k), y_train, cfg.cv_folds,
                                            derive_seed(cell_seed, {0xF0u, (std::uint64_t)b, (std::uint64_t)k}));
            if (cv.support.empty()) continue;
            std::vector<int> cols;
            for (int j : cv.support) cols.push_back(design.groups[k][j]);
            lpml_hats.push_back(make_hat(design.columns(cols), HatKind::lasso_refit));
        }
        Vec lpml_m_pred = Vec::Constant(n, y_train_mean);
        Vec lpml_l_pred = lpml_m_pred;
        if (!lpml_hats.empty()) {
            FitResult fit = fit_prototype_penalized(lpml_hats, y_train, cfg.sigma2, true);
            lpml_m_pred = fit.mu_hat * solve_g(lpml_hats, fit.theta_hat, ones);
            lpml_l_pred = Vec::Constant(n, fit.mu_hat);
            for (std::size_t k = 0; k < lpml_hats.size(); ++k)
                lpml_l_pred += fit.theta_hat[k] * lpml_hats[k].apply(y_train);
        }
        mses[0] = mse(lpml_m_pred);
        mses[1] = mse(lpml_l_pred);

        // LSL: CV lasso on the full matrix, least squares refit with intercept
        {
            CvLassoResult cv = cv_lasso_min(design.X, y_train, cfg.cv_folds,
                                            derive_seed(cell_seed, {0xF1u, (std::uint64_t)b}));
            Vec pred = Vec::Constant(n, y_train_mean);
            if (!cv.support.empty()) {
                Mat basis = orthonormal_basis(design.columns(cv.support));
                pred += basis * (basis.transpose() * y_train);
            }
            mses[2] = mse(pred);
        }
        // LSL-O: least squares on the designated non-null columns
        {
            std::vector<int> all_true;
            for (int k = 0; k < K; ++k)
                all_true.insert(all_true.end(), true_supports[k].begin(), true_supports[k].end());
            Mat basis = orthonormal_basis(design.columns(all_true));
            Vec pred = Vec::Constant(n, y_train_mean);
            pred += basis * (basis.transpose() * y_train);
            mses[3] = mse(pred);
        }
        // OPML: true supports, ML fit, linear estimate
        {
            FitResult fit = fit_prototype_penalized(true_hats, y_train, cfg.sigma2, true);
            Vec pred = Vec::Constant(n, fit.mu_hat);
            for (int k = 0; k < K; ++k) pred += fit.theta_hat[k] * true_hats[k].apply(y_train);
            mses[4] = mse(pred);
        }
        // SOPML: true supports and true parameters
        {
            Vec pred_m = cell.mu * solve_g(true_hats, cell.theta, ones);
            Vec pred_l = Vec::Constant(n, cell.mu);
            for (int k = 0; k < K; ++k) pred_l += cell.theta[k] * true_hats[k].apply(y_train);
            mses[5] = mse(pred_m);
            mses[6] = mse(pred_l);
        }

        for (std::size_t e = 0; e < kEstimators.size(); ++e) {
            EstimationRow& row = rows[b * kEstimators.size() + e];
            row.cell = cell_tag(cell);
            row.estimator = kEstimators[e];
            row.replication = b;
            row.mse = mses[e];
            row.ratio_vs_lpml_m = mses[e] / mses[0];
        }
    }
    return rows;
}

std::vector<EstimationRow> run_estimation_experiment(const EstimationConfig& cfg) {
    std::vector<EstimationRow> all;
    for (const auto& cell : estimation_grid()) {
        auto rows = run_estimation_cell(cfg, cell);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

}  // namespace protosel
