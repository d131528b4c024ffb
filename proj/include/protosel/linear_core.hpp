#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace protosel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Design matrix with standardized columns (zero mean, unit Euclidean norm)
// and a disjoint partition of the columns into groups.
struct GroupedDesign {
    Mat X;
    std::vector<std::vector<int>> groups;
    Vec column_means;
    Vec column_scales;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
    int n_groups() const { return static_cast<int>(groups.size()); }
    Mat group_columns(int k) const;
    Mat columns(const std::vector<int>& idx) const;

    // Centers and rescales the raw columns, recording means/scales; validates
    // the partition (disjoint, in range, nonempty groups).
    static GroupedDesign standardize(Mat raw, std::vector<std::vector<int>> groups);
};

enum class HatKind { least_squares, ridge, lasso_refit };

// Prototype hat matrix stored as H = U diag(w) U^T with orthonormal U.
// Projections (least squares / lasso refit) have w = 1; ridge has
// w_i = d_i^2 / (d_i^2 + lambda).
struct HatOperator {
    Mat basis;     // n x m, orthonormal columns
    Vec weights;   // length m
    HatKind kind = HatKind::least_squares;
    double lambda = 0.0;

    int rank() const { return static_cast<int>(basis.cols()); }
    bool idempotent() const { return kind != HatKind::ridge; }
    Vec apply(const Vec& y) const;
    double quad(const Vec& y) const;  // y^T H y
    double trace() const { return weights.sum(); }
    Mat dense() const;
};

// Rank-revealing orthonormal basis of the column space (SVD, singular values
// below tol * sigma_max dropped).
Mat orthonormal_basis(const Mat& X, double rel_tol = 1e-10);

HatOperator make_hat(const Mat& X_sub, HatKind kind, double lambda = 0.0);

// G(theta) = I - sum_k theta_k H_k.
struct GTheta {
    Vec theta;
    const std::vector<HatOperator>* hats = nullptr;

    GTheta(Vec t, const std::vector<HatOperator>& h) : theta(std::move(t)), hats(&h) {}
    int n() const { return hats->empty() ? 0 : static_cast<int>((*hats)[0].basis.rows()); }
    Vec apply(const Vec& y) const;  // G(theta) y
};

// Stacked-basis quantities fixed for a given hat set, shared across theta
// evaluations. G(theta) = I - U D(theta) U^T with U the concatenated bases and
// D(theta) diagonal with entries theta_{g(i)} * w_i, so the spectrum of G is
// {1} plus 1 - eig(Gram^{1/2} D Gram^{1/2}).
class StackedHats {
public:
    explicit StackedHats(const std::vector<HatOperator>& hats);

    int n() const { return static_cast<int>(U_.rows()); }
    int s() const { return static_cast<int>(U_.cols()); }
    int n_groups() const { return static_cast<int>(offsets_.size()) - 1; }

    const Mat& U() const { return U_; }
    const Mat& gram() const { return gram_; }
    int group_offset(int k) const { return offsets_[k]; }
    int group_size(int k) const { return offsets_[k + 1] - offsets_[k]; }
    const Vec& weights() const { return weights_; }

    // per-component coefficients theta_{g(i)} * w_i
    Vec coeffs(const Vec& theta) const;

    struct Spectrum {
        double min_eig;
        double log_det;  // -inf when G is not positive definite
    };
    Spectrum spectrum(const Vec& theta) const;

private:
    Mat U_;
    Mat gram_;
    Mat gram_sqrt_;
    Vec weights_;
    std::vector<int> offsets_;
};

// Iterative rank-one Sherman-Morrison build of G(theta)^{-1}; s rank-one
// updates at O(n^2) each.
Mat sherman_morrison_inverse(const GTheta& g);
Mat sherman_morrison_inverse(const GTheta& g, const StackedHats& stacked);

double log_det_g(const GTheta& g);
double log_det_g(const GTheta& g, const StackedHats& stacked);

// min-eigenvalue feasibility check, margin per the semidefinite-cone rule
bool feasible_theta(const GTheta& g, double margin = 1e-10);

}  // namespace protosel
