#pragma once

#include "protosel/linear_core.hpp"
#include "protosel/selection.hpp"

#include <utility>
#include <vector>

namespace protosel {

// Norm window [t*, T*] for ||Hy||_2 conditional on delta = A(I-H)y and the
// prototype direction v = Hy/||Hy||, plus the induced statistic window.
struct TruncationBounds {
    double t_star = 0.0;
    double T_star = 0.0;
    double q_star = 0.0;
    double Q_star = 0.0;
    Vec delta;
    Vec v;
    double observed_norm = 0.0;
};

TruncationBounds norm_bounds(const SelectionEvent& event, const HatOperator& H, const Vec& y);

// p = P(chi2_1 > R | q* <= chi2_1 <= Q*), with [q*, Q*] the image of the norm
// window under R(t) = M log(M sigma^2) - 2M log t + t^2/sigma^2 - M.
double elr_chi1_pvalue(double R_obs, const TruncationBounds& bounds, int M, double sigma2,
                       bool* degenerate_window = nullptr);

// p = P(chi2_M outside M +- sqrt(2 M r) | (t*/sigma)^2 <= chi2_M <= (T*/sigma)^2).
double alr_exact_pvalue(double r_obs, const TruncationBounds& bounds, int M, double sigma2,
                        bool* degenerate_window = nullptr);

// Truncated-Gaussian p-value for the marginal-screening prototype coefficient
// Z = x_istar^T y / sigma.
double protolasso_pvalue(double Z_obs, const SelectionEvent& event, const Vec& x_istar,
                         const Vec& y, double sigma);

// Union of disjoint intervals on f > 0.
struct FTruncationRegion {
    std::vector<std::pair<double, double>> intervals;
    bool contains(double f, double tol = 1e-9) const;
};

// Row sets {f > 0 : q_j sqrt(c f) + r_j sqrt(1 + c f) + s_j <= 0} intersected,
// conditioning on v_N = Hy/||Hy||, v_D = (I-H)y/||(I-H)y|| and l = ||y||,
// with c = M/(n-M).
FTruncationRegion f_truncation_region(const SelectionEvent& event, const HatOperator& H,
                                      const Vec& y, int M, int n);

// P(F_{M, n-M} > F_obs | F in region).
double truncated_f_pvalue(double F_obs, const SelectionEvent& event, const HatOperator& H,
                          const Vec& y, int M, int n, int p);

}  // namespace protosel
