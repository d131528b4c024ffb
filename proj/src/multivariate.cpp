#include "protosel/multivariate.hpp"

#include "protosel/dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace protosel {

Vec ConditionedNull::project_out(const Vec& eps) const {
    if (p_basis.cols() == 0) return eps + delta;
    return eps - p_basis * (p_basis.transpose() * eps) + delta;
}

ConditionedNull build_conditioned_null(const SelectionEvent& stacked, const Mat& nontested_columns,
                                       const Vec& y) {
    ConditionedNull out;
    out.p_basis = nontested_columns.cols() > 0 ? orthonormal_basis(nontested_columns)
                                               : Mat(y.size(), 0);
    out.delta = out.p_basis.cols() > 0 ? Vec(out.p_basis * (out.p_basis.transpose() * y))
                                       : Vec(Vec::Zero(y.size()));
    if (out.p_basis.cols() > 0) {
        Mat aq = stacked.A * out.p_basis;
        out.a_tilde = stacked.A - aq * out.p_basis.transpose();
    } else {
        out.a_tilde = stacked.A;
    }
    out.b_tilde = stacked.b - stacked.A * out.delta;
    Vec eps_obs = y - out.delta;
    if (out.a_tilde.rows() > 0 && !((out.a_tilde * eps_obs - out.b_tilde).array() <= 1e-8).all())
        throw std::runtime_error("build_conditioned_null: conditioning bug");
    return out;
}

Mat alr_trace_gram(const std::vector<HatOperator>& hats) {
    const int K = static_cast<int>(hats.size());
    Mat h(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = k; l < K; ++l) {
            // tr(H_k H_l) = || W_k^{1/2} U_k^T U_l W_l^{1/2} ||_F^2 for
            // idempotent hats (weights 1) this is the basis Gram block norm
            Mat cross = hats[k].basis.transpose() * hats[l].basis;
            double tr = 0.0;
            for (int i = 0; i < cross.rows(); ++i)
                for (int j = 0; j < cross.cols(); ++j)
                    tr += hats[k].weights[i] * hats[l].weights[j] * cross(i, j) * cross(i, j);
            h(k, l) = tr;
            h(l, k) = tr;
        }
    return h;
}

namespace {

double quad_form_solve(const Mat& m, const Vec& c) {
    Eigen::LDLT<Mat> ldlt(m);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("alr_multivariate: degenerate prototype Gram");
    Vec d = ldlt.vectorD();
    if (d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff()))
        throw std::runtime_error("alr_multivariate: degenerate prototype Gram");
    return c.dot(ldlt.solve(c));
}

}  // namespace

double alr_multivariate(const Vec& y, const std::vector<HatOperator>& hats,
                        const std::vector<int>& sizes, double sigma2, int drop,
                        const Mat* trace_gram) {
    const int K = static_cast<int>(hats.size());
    if (drop < 0 || drop >= K) throw std::invalid_argument("alr_multivariate: bad drop index");
    Mat htilde = trace_gram ? *trace_gram : alr_trace_gram(hats);

    Mat yhat(y.size(), K);
    for (int k = 0; k < K; ++k) yhat.col(k) = hats[k].apply(y);
    Vec c(K);
    Mat m(K, K);
    for (int k = 0; k < K; ++k) {
        c[k] = yhat.col(k).dot(y) / sigma2 - static_cast<double>(sizes[k]);
        for (int l = k; l < K; ++l) {
            m(k, l) = yhat.col(k).dot(yhat.col(l)) / sigma2 + htilde(k, l);
            m(l, k) = m(k, l);
        }
    }
    double full = quad_form_solve(m, c);
    if (K == 1) return full;

    Vec c_red(K - 1);
    Mat m_red(K - 1, K - 1);
    int ki = 0;
    for (int k = 0; k < K; ++k) {
        if (k == drop) continue;
        c_red[ki] = c[k];
        int li = 0;
        for (int l = 0; l < K; ++l) {
            if (l == drop) continue;
            m_red(ki, li) = m(k, l);
            ++li;
        }
        ++ki;
    }
    return full - quad_form_solve(m_red, c_red);
}

ElrStatistic elr_multivariate(const Vec& y, const std::vector<HatOperator>& hats, double sigma2,
                              int drop, const Vec* warm_full, const Vec* warm_restricted) {
    const int K = static_cast<int>(hats.size());
    if (drop < 0 || drop >= K) throw std::invalid_argument("elr_multivariate: bad drop index");
    PrototypeLikelihood pl(hats, y, sigma2);
    FitResult full = warm_full ? pl.fit_mle(*warm_full) : pl.fit_mle();
    FitResult restricted = warm_restricted ? pl.fit_mle_restricted({drop}, *warm_restricted)
                                           : pl.fit_mle_restricted({drop});
    ElrStatistic out;
    out.value = 2.0 * (full.loglik_at_opt - restricted.loglik_at_opt);
    out.converged = full.converged && restricted.converged;
    out.theta_full = full.theta_hat;
    out.theta_restricted = restricted.theta_hat;
    return out;
}

namespace {

// joint regression of centered y on K prototypes, t statistic on `tested`
TestResult joint_t_test(const std::string& name, const Mat& protos, const Vec& y, int tested) {
    const double n = static_cast<double>(y.size());
    const int K = static_cast<int>(protos.cols());
    Vec yc = y.array() - y.mean();
    Mat xtx = protos.transpose() * protos;
    Eigen::LDLT<Mat> ldlt(xtx);
    Vec beta = ldlt.solve(protos.transpose() * yc);
    double rss = (yc - protos * beta).squaredNorm();
    double df = n - static_cast<double>(K);
    Mat xtx_inv = ldlt.solve(Mat::Identity(K, K));
    double se = std::sqrt(rss / df * xtx_inv(tested, tested));
    TestResult res;
    res.method = name;
    res.statistic = beta[tested] / se;
    res.p_value = student_t_two_sided_p(res.statistic, df);
    res.reference = "analytic";
    return res;
}

}  // namespace

std::vector<TestResult> run_multivariate_battery(const std::vector<std::string>& methods,
                                                 const MultivariateSetup& setup, const Vec& y) {
    const GroupedDesign& design = *setup.design;
    const Mat& X = design.X;
    const int n = design.n(), p = design.p();
    const int K = design.n_groups();
    const int tested = setup.tested_group;
    const double sigma2 = setup.sigma2;

    auto wants = [&](std::initializer_list<const char*> names) {
        for (const auto& m : methods)
            for (const char* t : names)
                if (m == t) return true;
        return false;
    };
    const bool needs_selective = wants({"ALR-lasso", "ELR-lasso", "F"});
    const bool needs_elr = wants({"ELR-lasso"});
    const bool needs_alr = wants({"ALR-lasso"});
    const bool needs_f = wants({"F"});

    // fixed selection: per-group lasso outcomes, their stacked polytope, and
    // the Lemma-1 conditioned null
    std::vector<HatOperator> sel_hats;
    std::vector<int> sel_sizes;
    int drop = -1;  // index of the tested group among groups with selections
    bool tested_selected = false;
    SelectionEvent stacked;
    ConditionedNull cond;
    Mat p_all_basis;  // basis of all columns (for the selective F)

    double alr_obs = 0.0, f_obs = 0.0;
    ElrStatistic elr_obs;
    long b_total = 0, exceed_alr = 0, exceed_elr = 0, exceed_f = 0;
    bool elr_all_converged = true;

    if (needs_selective) {
        std::vector<SelectionEvent> events;
        std::vector<std::vector<int>> selected_cols(K);
        for (int k = 0; k < K; ++k) {
            Mat xg = design.group_columns(k);
            LassoSelection sel = lasso_fixed_lambda(xg, y, setup.lambdas.at(k), k);
            if (sel.active.empty()) {
                events.push_back(lasso_null_event(xg, setup.lambdas.at(k)));
            } else {
                events.push_back(lasso_event(sel, xg, setup.lambdas.at(k)));
                for (int j : sel.active) selected_cols[k].push_back(design.groups[k][j]);
            }
        }
        tested_selected = !selected_cols[tested].empty();
        stacked = SelectionEvent::stack(events);

        if (tested_selected) {
            std::vector<int> nontested;
            for (int k = 0; k < K; ++k) {
                if (!selected_cols[k].empty()) {
                    if (k == tested) drop = static_cast<int>(sel_hats.size());
                    sel_hats.push_back(make_hat(design.columns(selected_cols[k]), HatKind::lasso_refit));
                    sel_sizes.push_back(static_cast<int>(selected_cols[k].size()));
                }
                if (k != tested)
                    for (int j : selected_cols[k]) nontested.push_back(j);
            }
            cond = build_conditioned_null(stacked, design.columns(nontested), y);

            Mat trace_gram = alr_trace_gram(sel_hats);
            if (needs_alr) alr_obs = alr_multivariate(y, sel_hats, sel_sizes, sigma2, drop, &trace_gram);
            if (needs_elr) {
                elr_obs = elr_multivariate(y, sel_hats, sigma2, drop);
                elr_all_converged = elr_obs.converged;
            }
            if (needs_f) {
                p_all_basis = orthonormal_basis(X);
                double q_all = (p_all_basis.transpose() * y).squaredNorm();
                double q_non = cond.p_basis.cols() > 0
                                   ? (cond.p_basis.transpose() * y).squaredNorm()
                                   : 0.0;
                f_obs = ((q_all - q_non) / sel_sizes[drop]) /
                        ((y.squaredNorm() - q_all) / (n - p));
            }

            ConstrainedGaussian target;
            target.mean = Vec::Zero(n);
            target.iso_scale = std::sqrt(sigma2);
            target.event.A = cond.a_tilde;
            target.event.b = cond.b_tilde;
            target.event.meta = "conditioned";
            Mat samples = hit_and_run(target, y - cond.delta, setup.hr);
            b_total = samples.rows();

            Vec warm_full = elr_obs.theta_full, warm_restr = elr_obs.theta_restricted;
            for (long b = 0; b < b_total; ++b) {
                Vec ys = cond.project_out(samples.row(b).transpose());
                if (needs_alr &&
                    alr_multivariate(ys, sel_hats, sel_sizes, sigma2, drop, &trace_gram) > alr_obs)
                    ++exceed_alr;
                if (needs_elr) {
                    ElrStatistic st =
                        elr_multivariate(ys, sel_hats, sigma2, drop, &warm_full, &warm_restr);
                    if (st.value > elr_obs.value) ++exceed_elr;
                    elr_all_converged = elr_all_converged && st.converged;
                    warm_full = st.theta_full;
                    warm_restr = st.theta_restricted;
                }
                if (needs_f) {
                    double q_all = (p_all_basis.transpose() * ys).squaredNorm();
                    double q_non = cond.p_basis.cols() > 0
                                       ? (cond.p_basis.transpose() * ys).squaredNorm()
                                       : 0.0;
                    double f = ((q_all - q_non) / sel_sizes[drop]) /
                               ((ys.squaredNorm() - q_all) / (n - p));
                    if (f > f_obs) ++exceed_f;
                }
            }
        }
    }

    std::string sampled_ref = "sampled(B=" + std::to_string(setup.hr.n_samples) +
                              ",C=" + std::to_string(setup.hr.burn_in) +
                              ",seed=" + std::to_string(setup.hr.seed) + ")";
    auto hr_p = [&](long exceed) {
        if (setup.smoothed_hr)
            return static_cast<double>(exceed + 1) / static_cast<double>(b_total + 1);
        return static_cast<double>(exceed) / static_cast<double>(b_total);
    };

    std::vector<TestResult> out;
    out.reserve(methods.size());
    for (const auto& method : methods) {
        TestResult res;
        res.method = method;
        res.reference = "analytic";
        const bool selective = method == "ALR-lasso" || method == "ELR-lasso" || method == "F";
        if (selective && !tested_selected) {
            res.flags.no_selection = true;
            res.p_value = 1.0;
            res.reference = sampled_ref;
            out.push_back(std::move(res));
            continue;
        }
        if (method == "ALR-lasso") {
            res.statistic = alr_obs;
            res.p_value = hr_p(exceed_alr);
            res.reference = sampled_ref;
        } else if (method == "ELR-lasso") {
            res.statistic = elr_obs.value;
            res.p_value = hr_p(exceed_elr);
            res.reference = sampled_ref;
            res.flags.non_converged = !elr_all_converged;
        } else if (method == "F") {
            res.statistic = f_obs;
            res.p_value = hr_p(exceed_f);
            res.reference = sampled_ref;
        } else if (method == "ALR-all" || method == "ALR-or") {
            std::vector<HatOperator> hats;
            std::vector<int> sizes;
            for (int k = 0; k < K; ++k) {
                const std::vector<int>& cols = method == "ALR-all"
                                                   ? design.groups[k]
                                                   : setup.oracle_supports.at(k);
                hats.push_back(make_hat(design.columns(cols), HatKind::least_squares));
                sizes.push_back(static_cast<int>(cols.size()));
            }
            res.statistic = alr_multivariate(y, hats, sizes, sigma2, tested);
            res.p_value = chi2_sf(1.0, res.statistic);
        } else if (method == "F-all") {
            Mat ball = orthonormal_basis(X);
            std::vector<int> others;
            for (int k = 0; k < K; ++k)
                if (k != tested)
                    others.insert(others.end(), design.groups[k].begin(), design.groups[k].end());
            Mat bothers = orthonormal_basis(design.columns(others));
            double q_all = (ball.transpose() * y).squaredNorm();
            double q_oth = (bothers.transpose() * y).squaredNorm();
            int p1 = static_cast<int>(design.groups[tested].size());
            res.statistic = ((q_all - q_oth) / p1) / ((y.squaredNorm() - q_all) / (n - p));
            res.p_value = f_sf(p1, n - p, res.statistic);
        } else if (method == "t-mean" || method == "t-PC") {
            Mat protos(n, K);
            for (int k = 0; k < K; ++k) {
                Mat xg = design.group_columns(k);
                if (method == "t-mean") {
                    protos.col(k) = xg.rowwise().mean();
                } else {
                    Eigen::JacobiSVD<Mat> svd(xg, Eigen::ComputeThinV);
                    Vec v1 = svd.matrixV().col(0);
                    int imax = 0;
                    for (int i = 1; i < v1.size(); ++i)
                        if (std::fabs(v1[i]) > std::fabs(v1[imax])) imax = i;
                    if (v1[imax] < 0.0) v1 = -v1;
                    protos.col(k) = xg * v1;
                }
            }
            res = joint_t_test(method, protos, y, tested);
        } else {
            throw std::invalid_argument("run_multivariate_battery: unknown method " + method);
        }
        if (!std::isfinite(res.statistic) && res.flags.to_string().empty())
            throw std::runtime_error("run_multivariate_battery: non-finite statistic for " + method);
        out.push_back(std::move(res));
    }
    return out;
}

TestResult run_multivariate_test(const std::string& method, const MultivariateSetup& setup,
                                 const Vec& y) {
    return run_multivariate_battery({method}, setup, y)[0];
}

}  // namespace protosel
