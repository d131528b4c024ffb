// Test-only oracles, independent of the implementation paths they check:
// quadrature, dense linear algebra, finite differences, golden section,
// rejection sampling.
#pragma once

#include "protosel/linear_core.hpp"
#include "protosel/rng.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using protosel::Mat;
using protosel::Vec;

// adaptive Simpson in long double
inline long double simpson_rec(const std::function<long double(long double)>& f, long double a,
                               long double b, long double fa, long double fm, long double fb,
                               long double whole, long double tol, int depth) {
    long double m = 0.5L * (a + b);
    long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
    long double flm = f(lm), frm = f(rm);
    long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
    long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0L * tol)
        return left + right + (left + right - whole) / 15.0L;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, long double tol = 1e-13L) {
    long double m = 0.5L * (a + b);
    long double fa = f(a), fm = f(m), fb = f(b);
    long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

inline long double chi2_pdf(long double k, long double x) {
    if (x <= 0.0L) return 0.0L;
    long double a = 0.5L * k;
    return std::exp((a - 1.0L) * std::log(x) - 0.5L * x - a * std::log(2.0L) -
                    std::lgamma((double)a));
}

inline long double f_pdf(long double d1, long double d2, long double x) {
    if (x <= 0.0L) return 0.0L;
    long double lb = std::lgamma((double)(0.5L * d1)) + std::lgamma((double)(0.5L * d2)) -
                     std::lgamma((double)(0.5L * (d1 + d2)));
    long double l = 0.5L * d1 * std::log(d1 / d2) + (0.5L * d1 - 1.0L) * std::log(x) -
                    0.5L * (d1 + d2) * std::log(1.0L + d1 * x / d2) - lb;
    return std::exp(l);
}

inline long double norm_pdf_l(long double x) {
    return std::exp(-0.5L * x * x) / std::sqrt(2.0L * M_PIl);
}

// cdf of a density on (0, inf) by quadrature in s = sqrt(x); the substitution
// removes the x^{a-1} endpoint singularity for a >= 1/2
inline long double cdf_by_quadrature(const std::function<long double(long double)>& pdf,
                                     long double x, long double tol = 1e-13L) {
    if (x <= 0.0L) return 0.0L;
    return integrate([&](long double s) { return pdf(s * s) * 2.0L * s; }, 0.0L, std::sqrt(x),
                     tol);
}

// central finite differences
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-4) {
    const int n = static_cast<int>(x.size());
    Mat hess(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Vec xpp = x, xpm = x, xmp = x, xmm = x;
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            hess(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
            hess(j, i) = hess(i, j);
        }
    return hess;
}

// golden-section minimizer on [a, b]
inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-12) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::fabs(a) + std::fabs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// dense hat-matrix formulas
inline Mat dense_projection(const Mat& x) {
    return x * (x.transpose() * x).ldlt().solve(x.transpose());
}

inline Mat dense_ridge_hat(const Mat& x, double lambda) {
    Mat xtx = x.transpose() * x;
    xtx.diagonal().array() += lambda;
    return x * xtx.ldlt().solve(x.transpose());
}

inline Mat random_matrix(int n, int m, std::uint64_t seed) {
    protosel::RandomStream rs(seed);
    Mat x(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) x(i, j) = rs.normal();
    return x;
}

inline Vec random_vector(int n, std::uint64_t seed) {
    protosel::RandomStream rs(seed);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rs.normal();
    return v;
}

}  // namespace oracle
