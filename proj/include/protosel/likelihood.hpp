#pragma once

#include "protosel/linear_core.hpp"

#include <optional>
#include <utility>

namespace protosel {

struct FitResult {
    Vec theta_hat;
    double mu_hat = 0.0;
    double loglik_at_opt = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm_final = 0.0;
};

// How G(theta)^{-1} is produced inside Newton steps: the iterative rank-one
// build, or a dense LU inverse (kept as the timing reference).
enum class GInverseStrategy { sherman_morrison, dense_lu };

// Prototype-model log likelihood for a fixed hat set:
//   l(theta, mu) = log|G(theta)| - ||G(theta) y - mu 1||^2 / (2 sigma^2).
// Prototypes H_k y and the stacked-basis cache are computed once at
// construction; all evaluations are const and thread-safe.
class PrototypeLikelihood {
public:
    PrototypeLikelihood(std::vector<HatOperator> hats, Vec y, double sigma2,
                        bool intercept_enabled = false);

    int n_groups() const { return static_cast<int>(hats_.size()); }
    int n() const { return static_cast<int>(y_.size()); }
    double sigma2() const { return sigma2_; }
    bool intercept_enabled() const { return intercept_enabled_; }
    const std::vector<HatOperator>& hats() const { return hats_; }
    const StackedHats& stacked() const { return stacked_; }
    const Vec& y() const { return y_; }
    const Vec& prototype(int k) const { return yhat_[k]; }

    double loglik(const Vec& theta, double mu = 0.0) const;
    // Gradient and Hessian of the negative log likelihood at mu = 0;
    // trace terms via u_j^T G^{-1} u_j over the orthonormal bases, with
    // G^{-1} from the iterative Sherman-Morrison build.
    std::pair<Vec, Mat> grad_hess(const Vec& theta) const;

    FitResult fit_mle() const;
    FitResult fit_mle(const Vec& theta_init) const;
    FitResult fit_mle_restricted(const std::vector<int>& fixed_zero) const;
    FitResult fit_mle_restricted(const std::vector<int>& fixed_zero, const Vec& theta_init) const;

    void set_inverse_strategy(GInverseStrategy s) { inverse_strategy_ = s; }

private:
    struct Eval {
        double neg_loglik;
        double min_eig;
    };
    Eval objective(const Vec& theta) const;
    std::pair<Vec, Mat> grad_hess_impl(const Vec& theta, bool centered) const;
    FitResult newton(const std::vector<int>& free_idx, const Vec& theta_init) const;

    std::vector<HatOperator> hats_;
    Vec y_;
    double sigma2_;
    bool intercept_enabled_;
    GInverseStrategy inverse_strategy_ = GInverseStrategy::sherman_morrison;
    StackedHats stacked_;
    std::vector<Vec> yhat_;    // prototypes H_k y
    Mat proto_gram_;           // (K x K) yhat_k . yhat_l, centered when intercept on
    Vec proto_dot_y_;          // yhat_k . y (centered when intercept on)
    Vec y_centered_;
    double y_quad_;            // ||y||^2 (centered when intercept on)
};

}  // namespace protosel
