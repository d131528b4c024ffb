#include "protosel/selection.hpp"

#include "protosel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace protosel {

bool SelectionEvent::satisfied(const Vec& y, double slack) const {
    if (rows() == 0) return true;
    return ((A * y - b).array() <= slack).all();
}

SelectionEvent SelectionEvent::stack(const std::vector<SelectionEvent>& events) {
    int q = 0, n = 0;
    for (const auto& e : events) {
        q += e.rows();
        if (e.A.cols() > 0) n = static_cast<int>(e.A.cols());
    }
    SelectionEvent out;
    out.A.resize(q, n);
    out.b.resize(q);
    out.meta = "stacked";
    int r = 0;
    for (const auto& e : events) {
        if (e.rows() == 0) continue;
        out.A.middleRows(r, e.rows()) = e.A;
        out.b.segment(r, e.rows()) = e.b;
        r += e.rows();
    }
    return out;
}

namespace {
double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}
}  // namespace

LassoSelection lasso_fixed_lambda(const Mat& X_sub, const Vec& y, double lambda, int group) {
    if (lambda <= 0.0) throw std::invalid_argument("lasso_fixed_lambda: lambda must be > 0");
    const int m = static_cast<int>(X_sub.cols());
    Vec col_sq = X_sub.colwise().squaredNorm();
    Vec beta = Vec::Zero(m);
    Vec resid = y;

    const double tol = 1e-10;
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double max_delta = 0.0;
        for (int j = 0; j < m; ++j) {
            if (col_sq[j] <= 0.0) continue;
            double bj = beta[j];
            double rho = X_sub.col(j).dot(resid) + col_sq[j] * bj;
            double bj_new = soft_threshold(rho, lambda) / col_sq[j];
            if (bj_new != bj) {
                resid += X_sub.col(j) * (bj - bj_new);
                beta[j] = bj_new;
            }
            max_delta = std::max(max_delta, std::fabs(bj_new - bj));
        }
        if (max_delta < tol) break;
    }

    LassoSelection sel;
    sel.group = group;
    sel.lambda = lambda;
    sel.beta = beta;
    std::vector<double> s;
    for (int j = 0; j < m; ++j) {
        if (beta[j] != 0.0) {
            sel.active.push_back(j);
            s.push_back(beta[j] > 0.0 ? 1.0 : -1.0);
        }
    }
    sel.signs = Eigen::Map<Vec>(s.data(), s.size());
    return sel;
}

SelectionEvent lasso_event(const LassoSelection& sel, const Mat& X_sub, double lambda) {
    const int m = static_cast<int>(X_sub.cols());
    const int a = static_cast<int>(sel.active.size());
    if (a == 0) throw std::invalid_argument("lasso_event: empty active set");

    Mat Xm(X_sub.rows(), a);
    for (int j = 0; j < a; ++j) Xm.col(j) = X_sub.col(sel.active[j]);
    std::vector<int> inactive;
    for (int j = 0; j < m; ++j)
        if (!std::binary_search(sel.active.begin(), sel.active.end(), j)) inactive.push_back(j);
    const int ni = static_cast<int>(inactive.size());

    Mat xtx = Xm.transpose() * Xm;
    Eigen::FullPivLU<Mat> lu(xtx);
    if (lu.rank() < a) throw std::runtime_error("lasso_event: degenerate active set");
    Mat xtx_inv = lu.inverse();

    const Vec& s = sel.signs;
    // sign block: -diag(s) (X_M^T X_M)^{-1} X_M^T y <= -lambda diag(s) (X_M^T X_M)^{-1} s
    Mat a_sign = -(s.asDiagonal() * (xtx_inv * Xm.transpose()));
    Vec b_sign = -lambda * (s.asDiagonal() * (xtx_inv * s));

    SelectionEvent ev;
    ev.meta = "lasso(lambda=" + std::to_string(lambda) + ",group=" + std::to_string(sel.group) + ")";
    if (ni == 0) {
        ev.A = a_sign;
        ev.b = b_sign;
        return ev;
    }

    // inactive block: +-(1/lambda) X_{-M}^T (I - P_M) y <= 1 -+ X_{-M}^T X_M (X_M^T X_M)^{-1} s
    Mat Xi(X_sub.rows(), ni);
    for (int j = 0; j < ni; ++j) Xi.col(j) = X_sub.col(inactive[j]);
    Mat phat = Xm * (xtx_inv * Xm.transpose());
    Mat w = (Xi.transpose() - Xi.transpose() * phat) / lambda;
    Vec c = Xi.transpose() * (Xm * (xtx_inv * s));

    ev.A.resize(a + 2 * ni, X_sub.rows());
    ev.b.resize(a + 2 * ni);
    ev.A.topRows(a) = a_sign;
    ev.b.head(a) = b_sign;
    ev.A.middleRows(a, ni) = w;
    ev.b.segment(a, ni) = Vec::Ones(ni) - c;
    ev.A.bottomRows(ni) = -w;
    ev.b.tail(ni) = Vec::Ones(ni) + c;
    return ev;
}

SelectionEvent lasso_null_event(const Mat& X_sub, double lambda) {
    const int m = static_cast<int>(X_sub.cols());
    SelectionEvent ev;
    ev.meta = "lasso(lambda=" + std::to_string(lambda) + ",empty)";
    ev.A.resize(2 * m, X_sub.rows());
    ev.A.topRows(m) = X_sub.transpose() / lambda;
    ev.A.bottomRows(m) = -X_sub.transpose() / lambda;
    ev.b = Vec::Ones(2 * m);
    return ev;
}

ScreenResult marginal_screen_event(const Mat& X, const Vec& y) {
    const int p = static_cast<int>(X.cols());
    if (p < 1) throw std::invalid_argument("marginal_screen_event: no columns");
    Vec corr = X.transpose() * y;
    int istar = 0;
    for (int j = 1; j < p; ++j)
        if (std::fabs(corr[j]) > std::fabs(corr[istar])) istar = j;
    ScreenResult out;
    out.i_star = istar;
    out.sign = corr[istar] >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < p; ++j)
        if (j != istar && std::fabs(corr[j]) == std::fabs(corr[istar])) out.tie = true;

    // rows: (+-x_j - sign * x_istar)^T y <= 0 for j != i*, plus -sign * x_istar^T y <= 0
    out.event.A.resize(2 * (p - 1) + 1, X.rows());
    out.event.b = Vec::Zero(2 * (p - 1) + 1);
    out.event.meta = out.tie ? "marginal_screen(tie)" : "marginal_screen";
    Vec win = out.sign * X.col(istar);
    int r = 0;
    for (int j = 0; j < p; ++j) {
        if (j == istar) continue;
        out.event.A.row(r++) = (X.col(j) - win).transpose();
        out.event.A.row(r++) = (-X.col(j) - win).transpose();
    }
    out.event.A.row(r) = -win.transpose();
    return out;
}

CalibrationResult calibrate_lambda(const Mat& X_sub, int target_count, double sigma2, int trials,
                                   std::uint64_t seed) {
    const int m = static_cast<int>(X_sub.cols());
    const int n = static_cast<int>(X_sub.rows());
    if (target_count < 1 || target_count > m)
        throw std::invalid_argument("calibrate_lambda: target_count out of range");

    // common pilot draws across all bisection evaluations
    std::vector<Vec> pilots;
    pilots.reserve(trials);
    double sigma = std::sqrt(sigma2);
    for (int t = 0; t < trials; ++t) {
        RandomStream rs(derive_seed(seed, {0x10u, static_cast<std::uint64_t>(t)}));
        Vec y(n);
        for (int i = 0; i < n; ++i) y[i] = sigma * rs.normal();
        pilots.push_back(std::move(y));
    }

    auto mean_active = [&](double lambda) {
        double total = 0.0;
        for (const auto& y : pilots)
            total += static_cast<double>(lasso_fixed_lambda(X_sub, y, lambda).active.size());
        return total / static_cast<double>(trials);
    };

    double hi = 0.0;
    for (const auto& y : pilots) hi = std::max(hi, (X_sub.transpose() * y).cwiseAbs().maxCoeff());
    hi *= 1.01;
    double lo = hi * 1e-4;
    while (mean_active(lo) < static_cast<double>(target_count) && lo > hi * 1e-12) lo *= 0.1;

    CalibrationResult best;
    best.lambda = hi;
    best.mean_active = mean_active(hi);
    for (int step = 0; step < 60; ++step) {
        double mid = std::sqrt(lo * hi);
        double avg = mean_active(mid);
        if (std::fabs(avg - target_count) < std::fabs(best.mean_active - target_count)) {
            best.lambda = mid;
            best.mean_active = avg;
        }
        if (std::fabs(avg - target_count) <= 1.0) {
            best.lambda = mid;
            best.mean_active = avg;
            return best;
        }
        if (avg > target_count)
            lo = mid;
        else
            hi = mid;
    }
    best.warning = true;
    return best;
}

}  // namespace protosel
