#include "protosel/linear_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

Mat GroupedDesign::group_columns(int k) const { return columns(groups.at(k)); }

Mat GroupedDesign::columns(const std::vector<int>& idx) const {
    Mat out(X.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(j) = X.col(idx[j]);
    return out;
}

GroupedDesign GroupedDesign::standardize(Mat raw, std::vector<std::vector<int>> groups) {
    const int n = static_cast<int>(raw.rows());
    const int p = static_cast<int>(raw.cols());
    std::vector<char> seen(p, 0);
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("standardize: empty group");
        for (int j : g) {
            if (j < 0 || j >= p) throw std::invalid_argument("standardize: column index out of range");
            if (seen[j]) throw std::invalid_argument("standardize: groups overlap");
            seen[j] = 1;
        }
    }
    Vec means(p), scales(p);
    for (int j = 0; j < p; ++j) {
        means[j] = raw.col(j).mean();
        double colmax = raw.col(j).cwiseAbs().maxCoeff();
        // skip no-op adjustments so standardization is a bit-exact fixed
        // point (save/load round trips reproduce X exactly)
        if (std::fabs(means[j]) > 1e-14 * std::max(1.0, colmax)) raw.col(j).array() -= means[j];
        scales[j] = raw.col(j).norm();
        if (scales[j] < 1e-300) throw std::invalid_argument("standardize: constant column");
        if (std::fabs(scales[j] - 1.0) > 1e-13) raw.col(j) /= scales[j];
    }
    (void)n;
    return GroupedDesign{std::move(raw), std::move(groups), std::move(means), std::move(scales)};
}

Vec HatOperator::apply(const Vec& y) const {
    if (rank() == 0) return Vec::Zero(y.size());
    return basis * (weights.asDiagonal() * (basis.transpose() * y));
}

double HatOperator::quad(const Vec& y) const {
    if (rank() == 0) return 0.0;
    Vec t = basis.transpose() * y;
    return (weights.array() * t.array().square()).sum();
}

Mat HatOperator::dense() const {
    if (rank() == 0) return Mat::Zero(basis.rows(), basis.rows());
    return basis * weights.asDiagonal() * basis.transpose();
}

Mat orthonormal_basis(const Mat& X, double rel_tol) {
    Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU);
    const auto& d = svd.singularValues();
    if (d.size() == 0 || d[0] <= 0.0) return Mat(X.rows(), 0);
    int r = 0;
    while (r < d.size() && d[r] > rel_tol * d[0]) ++r;
    return svd.matrixU().leftCols(r);
}

HatOperator make_hat(const Mat& X_sub, HatKind kind, double lambda) {
    if (X_sub.cols() == 0) throw std::invalid_argument("make_hat: empty group");
    if (kind == HatKind::ridge) {
        if (lambda < 0.0) throw std::invalid_argument("make_hat: negative ridge penalty");
        Eigen::JacobiSVD<Mat> svd(X_sub, Eigen::ComputeThinU);
        const auto& d = svd.singularValues();
        int r = 0;
        while (r < d.size() && d[r] > 1e-10 * d[0]) ++r;
        HatOperator h;
        h.basis = svd.matrixU().leftCols(r);
        h.weights = Vec(r);
        for (int i = 0; i < r; ++i) h.weights[i] = d[i] * d[i] / (d[i] * d[i] + lambda);
        h.kind = kind;
        h.lambda = lambda;
        return h;
    }
    HatOperator h;
    h.basis = orthonormal_basis(X_sub);
    h.weights = Vec::Ones(h.basis.cols());
    h.kind = kind;
    return h;
}

Vec GTheta::apply(const Vec& y) const {
    Vec out = y;
    for (std::size_t k = 0; k < hats->size(); ++k) out -= theta[k] * (*hats)[k].apply(y);
    return out;
}

StackedHats::StackedHats(const std::vector<HatOperator>& hats) {
    int n = hats.empty() ? 0 : static_cast<int>(hats[0].basis.rows());
    int s = 0;
    offsets_.push_back(0);
    for (const auto& h : hats) {
        s += h.rank();
        offsets_.push_back(s);
    }
    U_.resize(n, s);
    weights_.resize(s);
    for (std::size_t k = 0; k < hats.size(); ++k) {
        int off = offsets_[k], m = hats[k].rank();
        if (m > 0) {
            U_.middleCols(off, m) = hats[k].basis;
            weights_.segment(off, m) = hats[k].weights;
        }
    }
    gram_ = U_.transpose() * U_;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram_);
    Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    gram_sqrt_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Vec StackedHats::coeffs(const Vec& theta) const {
    Vec c(s());
    for (int k = 0; k < n_groups(); ++k) {
        int off = offsets_[k], m = group_size(k);
        if (m > 0) c.segment(off, m) = theta[k] * weights_.segment(off, m);
    }
    return c;
}

StackedHats::Spectrum StackedHats::spectrum(const Vec& theta) const {
    if (s() == 0) return {1.0, 0.0};
    Vec c = coeffs(theta);
    Mat S = gram_sqrt_ * c.asDiagonal() * gram_sqrt_;
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    const Vec& lam = es.eigenvalues();
    double min_eig = 1.0 - lam.maxCoeff();
    if (s() < n()) min_eig = std::min(min_eig, 1.0);
    double log_det = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        double e = 1.0 - lam[i];
        if (e <= 1e-12) return {min_eig, -std::numeric_limits<double>::infinity()};
        log_det += std::log(e);
    }
    return {min_eig, log_det};
}

Mat sherman_morrison_inverse(const GTheta& g, const StackedHats& stacked) {
    const int n = stacked.n();
    Mat g_inv = Mat::Identity(n, n);
    Vec c = stacked.coeffs(g.theta);
    Vec v(n);
    for (int i = 0; i < stacked.s(); ++i) {
        double ci = c[i];
        if (ci == 0.0) continue;
        const auto u = stacked.U().col(i);
        v.noalias() = g_inv.selfadjointView<Eigen::Lower>() * u;
        double denom = 1.0 - ci * u.dot(v);
        if (std::fabs(denom) < 1e-12) throw std::runtime_error("sherman_morrison_inverse: singular update");
        g_inv.selfadjointView<Eigen::Lower>().rankUpdate(v, ci / denom);
    }
    return Mat(g_inv.selfadjointView<Eigen::Lower>());
}

Mat sherman_morrison_inverse(const GTheta& g) {
    StackedHats stacked(*g.hats);
    return sherman_morrison_inverse(g, stacked);
}

double log_det_g(const GTheta& g, const StackedHats& stacked) {
    auto sp = stacked.spectrum(g.theta);
    if (!std::isfinite(sp.log_det)) throw std::runtime_error("log_det_g: infeasible theta");
    return sp.log_det;
}

double log_det_g(const GTheta& g) {
    StackedHats stacked(*g.hats);
    return log_det_g(g, stacked);
}

bool feasible_theta(const GTheta& g, double margin) {
    StackedHats stacked(*g.hats);
    return stacked.spectrum(g.theta).min_eig >= margin;
}

}  // namespace protosel
