#include "protosel/univariate.hpp"

#include "protosel/dist.hpp"
#include "protosel/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

std::string TestFlags::to_string() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(no_selection, "no-selection");
    add(non_converged, "non-converged");
    add(degenerate_window, "degenerate-window");
    add(tie, "tie");
    return out;
}

double elr_statistic(const Vec& y, const HatOperator& H, int M, double sigma2) {
    if (M < 1) throw std::invalid_argument("elr_statistic: M < 1");
    double t = H.quad(y);
    if (t <= 1e-14) throw std::invalid_argument("elr_statistic: y'Hy ~ 0");
    return M * std::log(M * sigma2) - M * std::log(t) + t / sigma2 - M;
}

double alr_statistic(const Vec& y, const HatOperator& H, int M, double sigma2) {
    if (M < 1) throw std::invalid_argument("alr_statistic: M < 1");
    double z = (H.quad(y) / sigma2 - M) / std::sqrt(2.0 * M);
    return z * z;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elr_from_quad(double t, int M, double sigma2) {
    if (t <= 1e-300) return kInf;
    return M * std::log(M * sigma2) - M * std::log(t) + t / sigma2 - M;
}

double alr_from_quad(double t, int M, double sigma2) {
    double z = (t / sigma2 - M) / std::sqrt(2.0 * M);
    return z * z;
}

double hr_pvalue(long exceed, long total, bool smoothed) {
    if (smoothed) return static_cast<double>(exceed + 1) / static_cast<double>(total + 1);
    return static_cast<double>(exceed) / static_cast<double>(total);
}

// two-sided no-intercept t-test of centered y on a single regressor
TestResult simple_t_test(const std::string& name, const Vec& x, const Vec& y) {
    const double n = static_cast<double>(y.size());
    Vec yc = y.array() - y.mean();
    double xtx = x.squaredNorm();
    double beta = x.dot(yc) / xtx;
    double rss = (yc - beta * x).squaredNorm();
    double df = n - 1.0;
    double se = std::sqrt(rss / df / xtx);
    TestResult res;
    res.method = name;
    res.statistic = beta / se;
    res.p_value = student_t_two_sided_p(res.statistic, df);
    res.reference = "analytic";
    return res;
}

}  // namespace

std::vector<TestResult> run_univariate_battery(const std::vector<std::string>& methods,
                                               const UnivariateSetup& setup, const Vec& y) {
    const GroupedDesign& design = *setup.design;
    const Mat& X = design.X;
    const int n = design.n(), p = design.p();
    const double sigma2 = setup.sigma2;

    auto wants = [&](std::initializer_list<const char*> names) {
        for (const auto& m : methods)
            for (const char* t : names)
                if (m == t) return true;
        return false;
    };
    const bool needs_lasso =
        wants({"ELR-HR", "ELR-Chi", "ALR-HR", "ALR-Exact", "F", "F-HR"});
    const bool needs_chain = wants({"ELR-HR", "ALR-HR", "F-HR"});

    // shared lasso selection + polytope
    bool have_selection = false;
    HatOperator hat;
    int m_sel = 0;
    SelectionEvent event;
    if (needs_lasso) {
        LassoSelection sel = lasso_fixed_lambda(X, y, setup.lambda);
        if (!sel.active.empty()) {
            hat = make_hat(design.columns(sel.active), HatKind::lasso_refit);
            m_sel = static_cast<int>(sel.active.size());
            event = lasso_event(sel, X, setup.lambda);
            have_selection = true;
        }
    }

    double obs_quad = have_selection ? hat.quad(y) : 0.0;
    double obs_norm2 = y.squaredNorm();

    // one chain serves every sampled reference; the selection stays fixed
    // across replicates because the event is what we condition on
    long b_total = 0;
    long exceed_elr = 0, exceed_alr = 0, exceed_f = 0;
    if (needs_chain && have_selection) {
        ConstrainedGaussian target;
        target.mean = Vec::Zero(n);
        target.iso_scale = std::sqrt(sigma2);
        target.event = event;
        Mat samples = hit_and_run(target, y, setup.hr);
        b_total = samples.rows();
        const double f_obs = (obs_quad / m_sel) / ((obs_norm2 - obs_quad) / (n - m_sel));
        const double r_obs = elr_from_quad(obs_quad, m_sel, sigma2);
        const double a_obs = alr_from_quad(obs_quad, m_sel, sigma2);
        for (long b = 0; b < b_total; ++b) {
            Vec ys = samples.row(b).transpose();
            double t = hat.quad(ys);
            if (elr_from_quad(t, m_sel, sigma2) > r_obs) ++exceed_elr;
            if (alr_from_quad(t, m_sel, sigma2) > a_obs) ++exceed_alr;
            double f = (t / m_sel) / ((ys.squaredNorm() - t) / (n - m_sel));
            if (f > f_obs) ++exceed_f;
        }
    }

    std::string sampled_ref = "sampled(B=" + std::to_string(setup.hr.n_samples) +
                              ",C=" + std::to_string(setup.hr.burn_in) +
                              ",seed=" + std::to_string(setup.hr.seed) + ")";

    std::vector<TestResult> out;
    out.reserve(methods.size());
    for (const auto& method : methods) {
        TestResult res;
        res.method = method;
        res.reference = "analytic";
        const bool lasso_based = method == "ELR-HR" || method == "ELR-Chi" || method == "ALR-HR" ||
                                 method == "ALR-Exact" || method == "F" || method == "F-HR";
        if (lasso_based && !have_selection) {
            res.flags.no_selection = true;
            res.p_value = 1.0;
            if (method == "ELR-HR" || method == "ALR-HR" || method == "F-HR")
                res.reference = sampled_ref;
            out.push_back(std::move(res));
            continue;
        }
        if (method == "ELR-HR") {
            res.statistic = elr_from_quad(obs_quad, m_sel, sigma2);
            res.p_value = hr_pvalue(exceed_elr, b_total, setup.smoothed_hr);
            res.reference = sampled_ref;
        } else if (method == "ALR-HR") {
            res.statistic = alr_from_quad(obs_quad, m_sel, sigma2);
            res.p_value = hr_pvalue(exceed_alr, b_total, setup.smoothed_hr);
            res.reference = sampled_ref;
        } else if (method == "F-HR") {
            res.statistic = (obs_quad / m_sel) / ((obs_norm2 - obs_quad) / (n - m_sel));
            res.p_value = hr_pvalue(exceed_f, b_total, setup.smoothed_hr);
            res.reference = sampled_ref;
        } else if (method == "ELR-Chi") {
            res.statistic = elr_from_quad(obs_quad, m_sel, sigma2);
            TruncationBounds bounds = norm_bounds(event, hat, y);
            res.p_value =
                elr_chi1_pvalue(res.statistic, bounds, m_sel, sigma2, &res.flags.degenerate_window);
        } else if (method == "ALR-Exact") {
            res.statistic = alr_from_quad(obs_quad, m_sel, sigma2);
            TruncationBounds bounds = norm_bounds(event, hat, y);
            res.p_value =
                alr_exact_pvalue(res.statistic, bounds, m_sel, sigma2, &res.flags.degenerate_window);
        } else if (method == "F") {
            res.statistic = (obs_quad / m_sel) / ((obs_norm2 - obs_quad) / (n - m_sel));
            res.p_value = truncated_f_pvalue(res.statistic, event, hat, y, m_sel, n, p);
        } else if (method == "PT") {
            ScreenResult screen = marginal_screen_event(X, y);
            double sigma = std::sqrt(sigma2);
            res.statistic = X.col(screen.i_star).dot(y) / sigma;
            res.p_value =
                protolasso_pvalue(res.statistic, screen.event, X.col(screen.i_star), y, sigma);
            res.flags.tie = screen.tie;
        } else if (method == "LR-all") {
            HatOperator h = make_hat(X, HatKind::least_squares);
            res.statistic = elr_statistic(y, h, h.rank(), sigma2);
            res.p_value = chi2_sf(1.0, res.statistic);
        } else if (method == "LR-or") {
            if (setup.oracle_support.empty())
                throw std::invalid_argument("LR-or: oracle support not provided");
            HatOperator h = make_hat(design.columns(setup.oracle_support), HatKind::least_squares);
            res.statistic = elr_statistic(y, h, h.rank(), sigma2);
            res.p_value = chi2_sf(1.0, res.statistic);
        } else if (method == "t-mean") {
            Vec centroid = X.rowwise().mean();
            res = simple_t_test(method, centroid, y);
        } else if (method == "t-PC") {
            Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
            Vec v1 = svd.matrixV().col(0);
            int imax = 0;
            for (int i = 1; i < v1.size(); ++i)
                if (std::fabs(v1[i]) > std::fabs(v1[imax])) imax = i;
            if (v1[imax] < 0.0) v1 = -v1;
            res = simple_t_test(method, X * v1, y);
        } else if (method == "F-classic") {
            HatOperator h = make_hat(X, HatKind::least_squares);
            int m = h.rank();
            double t = h.quad(y);
            res.statistic = (t / m) / ((y.squaredNorm() - t) / (n - m));
            res.p_value = f_sf(m, n - m, res.statistic);
        } else if (method == "LR-ridge") {
            std::vector<HatOperator> hats = {make_hat(X, HatKind::ridge, setup.ridge_lambda)};
            PrototypeLikelihood pl(hats, y, sigma2);
            FitResult fit = pl.fit_mle();
            res.statistic = 2.0 * (fit.loglik_at_opt - pl.loglik(Vec::Zero(1)));
            res.p_value = chi2_sf(1.0, res.statistic);
            res.flags.non_converged = !fit.converged;
        } else {
            throw std::invalid_argument("run_univariate_battery: unknown method " + method);
        }
        if (!std::isfinite(res.statistic) && res.flags.to_string().empty())
            throw std::runtime_error("run_univariate_battery: non-finite statistic for " + method);
        out.push_back(std::move(res));
    }
    return out;
}

TestResult run_univariate_test(const std::string& method, const UnivariateSetup& setup,
                               const Vec& y) {
    return run_univariate_battery({method}, setup, y)[0];
}

}  // namespace protosel
