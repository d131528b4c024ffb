#include "protosel/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

namespace {
constexpr double kFeasMargin = 1e-10;
constexpr double kGradTol = 1e-8;
constexpr double kArmijo = 1e-4;
constexpr int kMaxIter = 100;
constexpr int kMaxHalvings = 50;
}  // namespace

PrototypeLikelihood::PrototypeLikelihood(std::vector<HatOperator> hats, Vec y, double sigma2,
                                         bool intercept_enabled)
    : hats_(std::move(hats)),
      y_(std::move(y)),
      sigma2_(sigma2),
      intercept_enabled_(intercept_enabled),
      stacked_(hats_) {
    if (sigma2_ <= 0.0) throw std::invalid_argument("PrototypeLikelihood: sigma2 must be > 0");
    const int K = n_groups();
    const double n = static_cast<double>(y_.size());
    yhat_.reserve(K);
    for (const auto& h : hats_) yhat_.push_back(h.apply(y_));

    Vec means(K);
    for (int k = 0; k < K; ++k) means[k] = yhat_[k].mean();
    double y_mean = y_.mean();

    proto_gram_.resize(K, K);
    proto_dot_y_.resize(K);
    for (int k = 0; k < K; ++k) {
        proto_dot_y_[k] = yhat_[k].dot(y_);
        for (int l = k; l < K; ++l) {
            proto_gram_(k, l) = yhat_[k].dot(yhat_[l]);
            proto_gram_(l, k) = proto_gram_(k, l);
        }
    }
    y_quad_ = y_.squaredNorm();
    if (intercept_enabled_) {
        // quadratic part uses centered prototypes/response: profiling mu is
        // the same as projecting out the constant direction
        for (int k = 0; k < K; ++k) {
            proto_dot_y_[k] -= n * means[k] * y_mean;
            for (int l = 0; l < K; ++l) proto_gram_(k, l) -= n * means[k] * means[l];
        }
        y_quad_ -= n * y_mean * y_mean;
    }
    y_centered_ = y_;
    if (intercept_enabled_) y_centered_.array() -= y_mean;
}

PrototypeLikelihood::Eval PrototypeLikelihood::objective(const Vec& theta) const {
    auto sp = stacked_.spectrum(theta);
    if (!std::isfinite(sp.log_det))
        return {std::numeric_limits<double>::infinity(), sp.min_eig};
    double quad = y_quad_ - 2.0 * theta.dot(proto_dot_y_) + theta.dot(proto_gram_ * theta);
    return {-sp.log_det + 0.5 * quad / sigma2_, sp.min_eig};
}

double PrototypeLikelihood::loglik(const Vec& theta, double mu) const {
    auto sp = stacked_.spectrum(theta);
    if (!std::isfinite(sp.log_det)) throw std::runtime_error("loglik: infeasible theta");
    Vec resid = y_;
    for (int k = 0; k < n_groups(); ++k) resid -= theta[k] * yhat_[k];
    resid.array() -= mu;
    return sp.log_det - 0.5 * resid.squaredNorm() / sigma2_;
}

std::pair<Vec, Mat> PrototypeLikelihood::grad_hess_impl(const Vec& theta, bool centered) const {
    const int K = n_groups();
    GTheta g(theta, hats_);
    Mat g_inv;
    if (inverse_strategy_ == GInverseStrategy::sherman_morrison) {
        g_inv = sherman_morrison_inverse(g, stacked_);
    } else {
        Mat dense = Mat::Identity(n(), n());
        Vec c = stacked_.coeffs(theta);
        dense.noalias() -= stacked_.U() * c.asDiagonal() * stacked_.U().transpose();
        g_inv = dense.partialPivLu().inverse();
    }
    Mat b = stacked_.U().transpose() * (g_inv * stacked_.U());

    Vec grad(K);
    Mat hess(K, K);
    const Mat& gram = proto_gram_;
    const Vec& dots = proto_dot_y_;
    (void)centered;  // centering is baked into gram/dots at construction
    for (int k = 0; k < K; ++k) {
        double tr_k = 0.0;
        int ok = stacked_.group_offset(k), mk = stacked_.group_size(k);
        for (int i = 0; i < mk; ++i)
            tr_k += stacked_.weights()[ok + i] * b(ok + i, ok + i);
        grad[k] = (theta.dot(gram.col(k)) - dots[k]) / sigma2_ + tr_k;
        for (int l = k; l < K; ++l) {
            int ol = stacked_.group_offset(l), ml = stacked_.group_size(l);
            double tr_kl = 0.0;
            for (int i = 0; i < mk; ++i)
                for (int j = 0; j < ml; ++j) {
                    double bij = b(ok + i, ol + j);
                    tr_kl += stacked_.weights()[ok + i] * stacked_.weights()[ol + j] * bij * bij;
                }
            hess(k, l) = gram(k, l) / sigma2_ + tr_kl;
            hess(l, k) = hess(k, l);
        }
    }
    return {grad, hess};
}

std::pair<Vec, Mat> PrototypeLikelihood::grad_hess(const Vec& theta) const {
    return grad_hess_impl(theta, intercept_enabled_);
}

FitResult PrototypeLikelihood::newton(const std::vector<int>& free_idx, const Vec& theta_init) const {
    const int K = n_groups();
    const int nf = static_cast<int>(free_idx.size());
    Vec theta = theta_init;

    FitResult res;
    res.theta_hat = theta;
    res.converged = nf == 0;
    res.gradient_norm_final = 0.0;

    double f_cur = objective(theta).neg_loglik;
    if (!std::isfinite(f_cur)) throw std::runtime_error("fit_mle: infeasible starting theta");

    for (int iter = 0; nf > 0 && iter < kMaxIter; ++iter) {
        auto [g, h] = grad_hess_impl(theta, intercept_enabled_);
        Vec gf(nf);
        Mat hf(nf, nf);
        for (int i = 0; i < nf; ++i) {
            gf[i] = g[free_idx[i]];
            for (int j = 0; j < nf; ++j) hf(i, j) = h(free_idx[i], free_idx[j]);
        }
        res.iterations = iter + 1;
        res.gradient_norm_final = gf.norm();
        if (res.gradient_norm_final < kGradTol) {
            res.converged = true;
            res.iterations = iter;
            break;
        }
        Vec d = hf.ldlt().solve(-gf);
        double slope = gf.dot(d);
        if (!d.allFinite() || slope >= 0.0) {
            d = -gf;
            slope = gf.dot(d);
        }
        double alpha = 1.0;
        bool accepted = false;
        for (int halve = 0; halve <= kMaxHalvings; ++halve) {
            Vec trial = theta;
            for (int i = 0; i < nf; ++i) trial[free_idx[i]] += alpha * d[i];
            Eval ev = objective(trial);
            if (ev.min_eig >= kFeasMargin && std::isfinite(ev.neg_loglik) &&
                ev.neg_loglik <= f_cur + kArmijo * alpha * slope) {
                theta = trial;
                f_cur = ev.neg_loglik;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // no admissible step; report non-convergence
    }

    res.theta_hat = theta;
    if (intercept_enabled_) {
        GTheta g(theta, hats_);
        res.mu_hat = g.apply(y_).sum() / static_cast<double>(n());
    }
    res.loglik_at_opt = loglik(theta, res.mu_hat);
    return res;
}

FitResult PrototypeLikelihood::fit_mle() const { return fit_mle(Vec::Zero(n_groups())); }

FitResult PrototypeLikelihood::fit_mle(const Vec& theta_init) const {
    std::vector<int> free_idx(n_groups());
    for (int k = 0; k < n_groups(); ++k) free_idx[k] = k;
    return newton(free_idx, theta_init);
}

FitResult PrototypeLikelihood::fit_mle_restricted(const std::vector<int>& fixed_zero) const {
    return fit_mle_restricted(fixed_zero, Vec::Zero(n_groups()));
}

FitResult PrototypeLikelihood::fit_mle_restricted(const std::vector<int>& fixed_zero,
                                                  const Vec& theta_init) const {
    std::vector<char> fixed(n_groups(), 0);
    for (int k : fixed_zero) {
        if (k < 0 || k >= n_groups()) throw std::invalid_argument("fit_mle_restricted: bad index");
        fixed[k] = 1;
    }
    Vec init = theta_init;
    std::vector<int> free_idx;
    for (int k = 0; k < n_groups(); ++k) {
        if (fixed[k])
            init[k] = 0.0;
        else
            free_idx.push_back(k);
    }
    return newton(free_idx, init);
}

}  // namespace protosel
