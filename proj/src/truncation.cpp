#include "protosel/truncation.hpp"

#include "protosel/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRowTol = 1e-12;
}  // namespace

TruncationBounds norm_bounds(const SelectionEvent& event, const HatOperator& H, const Vec& y) {
    Vec hy = H.apply(y);
    double norm = hy.norm();
    if (norm <= 1e-14) throw std::invalid_argument("norm_bounds: Hy = 0");

    TruncationBounds out;
    out.v = hy / norm;
    out.observed_norm = norm;
    out.delta = event.A * (y - hy);
    Vec btil = event.b - out.delta;
    Vec av = event.A * out.v;

    out.t_star = 0.0;
    out.T_star = kInf;
    for (int j = 0; j < av.size(); ++j) {
        if (av[j] > kRowTol)
            out.T_star = std::min(out.T_star, btil[j] / av[j]);
        else if (av[j] < -kRowTol)
            out.t_star = std::max(out.t_star, btil[j] / av[j]);
        else if (btil[j] < -1e-8)
            throw std::runtime_error("norm_bounds: inconsistent conditioning");
    }
    out.t_star = std::max(out.t_star, 0.0);
    double pad = 1e-6 * (1.0 + norm);
    if (norm < out.t_star - pad || norm > out.T_star + pad)
        throw std::runtime_error("norm_bounds: inconsistent conditioning");
    return out;
}

namespace {

// R as a function of the norm t; +inf at both extremes of t > 0
double elr_of_norm(double t, int M, double sigma2) {
    if (!(t > 0.0) || std::isinf(t)) return kInf;
    return M * std::log(M * sigma2) - 2.0 * M * std::log(t) + t * t / sigma2 - M;
}

}  // namespace

double elr_chi1_pvalue(double R_obs, const TruncationBounds& bounds, int M, double sigma2,
                       bool* degenerate_window) {
    if (degenerate_window) *degenerate_window = false;
    double r_lo = elr_of_norm(bounds.t_star, M, sigma2);
    double r_hi = elr_of_norm(bounds.T_star, M, sigma2);
    double Qs = std::max(r_lo, r_hi);
    double ref = std::sqrt(sigma2 * M);
    double qs = (ref >= bounds.t_star && ref <= bounds.T_star) ? 0.0 : std::min(r_lo, r_hi);
    if (!(Qs - qs >= 1e-12)) {
        if (degenerate_window) *degenerate_window = true;
        return 1.0;
    }
    return chi2_trunc_sf(1.0, std::max(R_obs, qs), qs, Qs);
}

double alr_exact_pvalue(double r_obs, const TruncationBounds& bounds, int M, double sigma2,
                        bool* degenerate_window) {
    if (degenerate_window) *degenerate_window = false;
    if (r_obs < 0.0) throw std::invalid_argument("alr_exact_pvalue: negative statistic");
    double lo = bounds.t_star * bounds.t_star / sigma2;
    double hi = std::isinf(bounds.T_star) ? kInf : bounds.T_star * bounds.T_star / sigma2;
    if (!(hi - lo >= 1e-12)) {
        if (degenerate_window) *degenerate_window = true;
        return 1.0;
    }
    double half = std::sqrt(2.0 * M * r_obs);
    double below = 1.0 - chi2_trunc_sf(M, static_cast<double>(M) - half, lo, hi);
    double above = chi2_trunc_sf(M, static_cast<double>(M) + half, lo, hi);
    return std::clamp(below + above, 0.0, 1.0);
}

double protolasso_pvalue(double Z_obs, const SelectionEvent& event, const Vec& x_istar,
                         const Vec& y, double sigma) {
    double t_obs = x_istar.dot(y);
    Vec delta = y - t_obs * x_istar;
    Vec btil = event.b - event.A * delta;
    Vec ax = event.A * x_istar;

    double zm = -kInf, zp = kInf;
    for (int j = 0; j < ax.size(); ++j) {
        if (ax[j] > kRowTol)
            zp = std::min(zp, btil[j] / ax[j]);
        else if (ax[j] < -kRowTol)
            zm = std::max(zm, btil[j] / ax[j]);
        else if (btil[j] < -1e-8)
            throw std::runtime_error("protolasso_pvalue: empty truncation");
    }
    zm /= sigma;
    zp /= sigma;
    if (!(zm < zp)) throw std::runtime_error("protolasso_pvalue: empty truncation");

    double abs_z = std::fabs(Z_obs);
    double a = std::max(-abs_z, zm);
    double b = std::min(abs_z, zp);
    double below = 1.0 - norm_trunc_sf(a, zm, zp);
    double above = norm_trunc_sf(b, zm, zp);
    return std::clamp(below + above, 0.0, 1.0);
}

bool FTruncationRegion::contains(double f, double tol) const {
    for (const auto& [lo, hi] : intervals)
        if (f >= lo - tol && f <= hi + tol) return true;
    return false;
}

namespace {

using Interval = std::pair<double, double>;

double row_value(double q, double r, double s, double u) {
    return q * u + r * std::sqrt(1.0 + u * u) + s;
}

// {u >= 0 : q u + r sqrt(1+u^2) + s <= 0} as a union of intervals.
std::vector<Interval> row_sublevel_set(double q, double r, double s) {
    double scale = std::fabs(q) + std::fabs(r) + std::fabs(s);
    if (scale < 1e-14) return {{0.0, kInf}};

    // candidate boundary points from squaring r sqrt(1+u^2) = -(q u + s)
    std::vector<double> roots;
    double a2 = q * q - r * r, a1 = 2.0 * q * s, a0 = s * s - r * r;
    auto consider = [&](double u) {
        if (!std::isfinite(u) || u <= 0.0) return;
        // Newton polish on the unsquared row function
        for (int it = 0; it < 60; ++it) {
            double g = row_value(q, r, s, u);
            double dg = q + r * u / std::sqrt(1.0 + u * u);
            if (std::fabs(dg) < 1e-300) break;
            double step = g / dg;
            u -= step;
            if (!(u > 0.0)) return;
            if (std::fabs(step) < 1e-15 * (1.0 + u)) break;
        }
        if (u > 0.0 && std::fabs(row_value(q, r, s, u)) <= 1e-9 * scale * (1.0 + u))
            roots.push_back(u);
    };
    if (std::fabs(a2) > 1e-14 * scale * scale) {
        double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            consider((-a1 + sq) / (2.0 * a2));
            consider((-a1 - sq) / (2.0 * a2));
        }
    } else if (std::fabs(a1) > 1e-14 * scale * scale) {
        consider(-a0 / a1);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::fabs(x - y) <= 1e-9 * (1.0 + x); }),
                roots.end());

    // probe sign between consecutive boundary points
    std::vector<double> cuts = {0.0};
    cuts.insert(cuts.end(), roots.begin(), roots.end());
    std::vector<Interval> out;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        double lo = cuts[i];
        double hi = (i + 1 < cuts.size()) ? cuts[i + 1] : kInf;
        double probe = std::isinf(hi) ? (lo + 1.0) * 4.0 : 0.5 * (lo + hi);
        if (row_value(q, r, s, probe) <= 0.0) {
            if (!out.empty() && out.back().second >= lo) {
                out.back().second = hi;
            } else {
                out.push_back({lo, hi});
            }
        }
    }
    return out;
}

std::vector<Interval> intersect_unions(const std::vector<Interval>& a,
                                       const std::vector<Interval>& b) {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double lo = std::max(a[i].first, b[j].first);
        double hi = std::min(a[i].second, b[j].second);
        if (lo < hi) out.push_back({lo, hi});
        if (a[i].second < b[j].second)
            ++i;
        else
            ++j;
    }
    return out;
}

}  // namespace

FTruncationRegion f_truncation_region(const SelectionEvent& event, const HatOperator& H,
                                      const Vec& y, int M, int n) {
    Vec hy = H.apply(y);
    Vec ry = y - hy;
    double nh = hy.norm(), nr = ry.norm(), l = y.norm();
    if (nh <= 1e-14 || nr <= 1e-14)
        throw std::invalid_argument("f_truncation_region: degenerate decomposition");
    Vec avn = event.A * (hy / nh);
    Vec avd = event.A * (ry / nr);
    const double c = static_cast<double>(M) / static_cast<double>(n - M);

    std::vector<Interval> region = {{0.0, kInf}};
    for (int j = 0; j < event.rows(); ++j) {
        auto rows = row_sublevel_set(l * avn[j], -event.b[j], l * avd[j]);
        region = intersect_unions(region, rows);
        if (region.empty()) break;
    }
    FTruncationRegion out;
    for (auto& [ulo, uhi] : region)
        out.intervals.push_back({ulo * ulo / c, std::isinf(uhi) ? kInf : uhi * uhi / c});
    return out;
}

double truncated_f_pvalue(double F_obs, const SelectionEvent& event, const HatOperator& H,
                          const Vec& y, int M, int n, int /*p*/) {
    FTruncationRegion region = f_truncation_region(event, H, y, M, n);
    if (!region.contains(F_obs, 1e-6 * (1.0 + F_obs)))
        throw std::runtime_error("truncated_f_pvalue: inconsistent region");
    const double d1 = M, d2 = n - M;
    double num = 0.0, den = 0.0;
    for (const auto& [lo, hi] : region.intervals) {
        den += f_prob_between(d1, d2, lo, hi);
        if (hi > F_obs) num += f_prob_between(d1, d2, std::max(lo, F_obs), hi);
    }
    if (den <= 0.0) return 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace protosel
