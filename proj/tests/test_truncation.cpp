#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "protosel/dist.hpp"
#include "protosel/selection.hpp"
#include "protosel/truncation.hpp"

#include <cmath>
#include <limits>

using namespace protosel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct LassoInstance {
    GroupedDesign design;
    Vec y;
    HatOperator hat;
    int m = 0;
    SelectionEvent event;
};

// a reproducible lasso run with nonempty selection
LassoInstance make_instance(int n, int p, double lambda, std::uint64_t seed) {
    std::vector<int> idx(p);
    for (int j = 0; j < p; ++j) idx[j] = j;
    LassoInstance inst{GroupedDesign::standardize(oracle::random_matrix(n, p, seed), {idx}),
                       Vec(), HatOperator(), 0, SelectionEvent()};
    for (std::uint64_t t = 0;; ++t) {
        inst.y = oracle::random_vector(n, seed * 1000 + t);
        LassoSelection sel = lasso_fixed_lambda(inst.design.X, inst.y, lambda);
        if (sel.active.size() < 2) continue;
        inst.hat = make_hat(inst.design.columns(sel.active), HatKind::lasso_refit);
        inst.m = static_cast<int>(sel.active.size());
        inst.event = lasso_event(sel, inst.design.X, lambda);
        return inst;
    }
}

}  // namespace

TEST_CASE("norm bounds: no constraints give [0, inf)") {
    Vec u = oracle::random_vector(10, 1);
    u /= u.norm();
    HatOperator h = make_hat(u, HatKind::least_squares);
    SelectionEvent empty;
    empty.A.resize(0, 10);
    empty.b.resize(0);
    Vec y = oracle::random_vector(10, 2);
    TruncationBounds b = norm_bounds(empty, h, y);
    CHECK(b.t_star == 0.0);
    CHECK(b.T_star == kInf);
}

TEST_CASE("norm bounds: one active direction row") {
    const int n = 10;
    Vec u = Vec::Unit(n, 0);
    HatOperator h = make_hat(u, HatKind::least_squares);
    Vec y = Vec::Zero(n);
    y[0] = 2.0;
    y[1] = 1.0;
    SelectionEvent ev;
    ev.A = u.transpose();  // row a = u, so A(I-H)y = 0 and Av = 1
    ev.b = Vec::Constant(1, 5.0);
    TruncationBounds b = norm_bounds(ev, h, y);
    CHECK(b.t_star == 0.0);
    CHECK(b.T_star == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(b.observed_norm == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("norm bounds verified by a line scan on a real lasso event") {
    LassoInstance inst = make_instance(30, 8, 1.0, 21);
    TruncationBounds b = norm_bounds(inst.event, inst.hat, inst.y);
    Vec residual = inst.y - inst.hat.apply(inst.y);
    REQUIRE(b.t_star <= b.observed_norm);
    REQUIRE(b.observed_norm <= b.T_star);

    double hi = std::isfinite(b.T_star) ? b.T_star : b.observed_norm * 4.0 + 5.0;
    for (int i = 0; i <= 400; ++i) {
        double t = (hi + 1.0) * i / 400.0;
        Vec pt = t * b.v + residual;
        bool inside = inst.event.satisfied(pt, 1e-9);
        bool in_window = t >= b.t_star - 1e-9 && t <= b.T_star + 1e-9;
        if (std::fabs(t - b.t_star) > 1e-6 * (1.0 + t) && std::fabs(t - b.T_star) > 1e-6 * (1.0 + t))
            CHECK(inside == in_window);
    }
}

TEST_CASE("elr chi1 p-value: trivial windows") {
    TruncationBounds open;
    open.t_star = 0.0;
    open.T_star = kInf;
    // no truncation: plain chi2_1 survival
    for (double r : {0.3, 1.7, 3.84, 9.0})
        CHECK(elr_chi1_pvalue(r, open, 7, 1.0) == doctest::Approx(chi2_sf(1.0, r)).epsilon(1e-10));

    // left edge of the window: p = 1 (note sigma sqrt(M) inside => q* = 0)
    CHECK(elr_chi1_pvalue(0.0, open, 7, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("elr chi1 p-value against a rejection-sampling oracle") {
    // window on the norm, mapped through the statistic; oracle draws chi2_1
    // directly and rejects outside [q*, Q*]
    struct Case {
        double t_star, T_star;
        int m;
        double sigma2;
    };
    for (Case c : {Case{1.5, 4.0, 4, 1.0}, Case{0.5, 2.4, 2, 0.7}, Case{3.0, kInf, 6, 1.3}}) {
        TruncationBounds b;
        b.t_star = c.t_star;
        b.T_star = c.T_star;
        auto map = [&](double t) {
            if (!(t > 0.0) || std::isinf(t))
                return kInf;
            return c.m * std::log(c.m * c.sigma2) - 2.0 * c.m * std::log(t) + t * t / c.sigma2 -
                   c.m;
        };
        double qlo = std::max(map(c.t_star), 0.0), qhi = map(c.T_star);
        double q_star = (std::sqrt(c.sigma2 * c.m) >= c.t_star &&
                         std::sqrt(c.sigma2 * c.m) <= c.T_star)
                            ? 0.0
                            : std::min(qlo, qhi);
        double q_top = std::max(qlo, qhi);
        double r_obs = 0.3 * q_star + 0.7 * std::min(q_top, q_star + 4.0);

        RandomStream rs(777);
        long kept = 0, above = 0;
        for (long i = 0; i < 1000000; ++i) {
            double z = rs.normal();
            double v = z * z;
            if (v < q_star || v > q_top) continue;
            ++kept;
            if (v > r_obs) ++above;
        }
        REQUIRE(kept > 1000);
        double mc = static_cast<double>(above) / kept;
        double se = std::sqrt(mc * (1.0 - mc) / kept);
        double p = elr_chi1_pvalue(r_obs, b, c.m, c.sigma2);
        CHECK(std::fabs(p - mc) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("alr exact p-value: closed forms and oracle") {
    TruncationBounds open;
    open.t_star = 0.0;
    open.T_star = kInf;
    CHECK(alr_exact_pvalue(0.0, open, 5, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    // no truncation: two-sided chi2_M band probability, cross-checked by
    // quadrature of the chi2_10 density
    int m = 10;
    double r = 1.9;
    double half = std::sqrt(2.0 * m * r);
    long double inside = oracle::integrate(
        [&](long double x) { return oracle::chi2_pdf(m, x); },
        (long double)std::max(0.0, m - half), (long double)(m + half));
    CHECK(alr_exact_pvalue(r, open, m, 1.0) ==
          doctest::Approx(1.0 - (double)inside).epsilon(1e-9));

    // truncated instance vs rejection oracle
    TruncationBounds b;
    b.t_star = 2.0;
    b.T_star = 5.0;
    double sigma2 = 1.1;
    double lo = b.t_star * b.t_star / sigma2, hi = b.T_star * b.T_star / sigma2;
    double r_obs = 0.8;
    RandomStream rs(778);
    long kept = 0, outside_band = 0;
    double band = std::sqrt(2.0 * m * r_obs);
    for (long i = 0; i < 1000000; ++i) {
        double v = 0.0;
        for (int k = 0; k < m; ++k) {
            double z = rs.normal();
            v += z * z;
        }
        if (v < lo || v > hi) continue;
        ++kept;
        if (v < m - band || v > m + band) ++outside_band;
    }
    REQUIRE(kept > 1000);
    double mc = static_cast<double>(outside_band) / kept;
    double se = std::sqrt(mc * (1.0 - mc) / kept);
    CHECK(std::fabs(alr_exact_pvalue(r_obs, b, m, sigma2) - mc) <= 3.0 * se + 1e-9);
}

TEST_CASE("protolasso single predictor reduces to the one-sided ratio") {
    const int n = 15;
    Vec x = oracle::random_vector(n, 31);
    x.array() -= x.mean();
    x /= x.norm();
    GroupedDesign d;
    d.X = x;
    ScreenResult sr = marginal_screen_event(d.X, x * 2.0);
    double z = 2.0;  // x'y / sigma with sigma = 1
    double p = protolasso_pvalue(z, sr.event, x, x * 2.0, 1.0);
    // window is [0, inf): p = (1 - Phi(|Z|)) / (1 - Phi(0))
    CHECK(p == doctest::Approx(norm_sf(2.0) / 0.5).epsilon(1e-9));
}

TEST_CASE("protolasso boundary: Z at the window edge gives p = 1") {
    const int n = 20, p = 4;
    std::vector<int> idx = {0, 1, 2, 3};
    GroupedDesign d = GroupedDesign::standardize(oracle::random_matrix(n, p, 32), {idx});
    Vec y = oracle::random_vector(n, 320);
    ScreenResult sr = marginal_screen_event(d.X, y);
    double z_obs = d.X.col(sr.i_star).dot(y);
    // compute the window and evaluate at its edge closest to zero
    Vec delta = y - z_obs * d.X.col(sr.i_star);
    Vec btil = -(sr.event.A * delta);
    Vec ax = sr.event.A * d.X.col(sr.i_star);
    double zm = -kInf, zp = kInf;
    for (int j = 0; j < ax.size(); ++j) {
        if (ax[j] > 1e-12) zp = std::min(zp, btil[j] / ax[j]);
        if (ax[j] < -1e-12) zm = std::max(zm, btil[j] / ax[j]);
    }
    double edge = std::fabs(zm) < std::fabs(zp) ? zm : zp;
    CHECK(protolasso_pvalue(edge, sr.event, d.X.col(sr.i_star), y, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("protolasso sign-flip symmetry") {
    const int n = 25, p = 5;
    std::vector<int> idx = {0, 1, 2, 3, 4};
    GroupedDesign d = GroupedDesign::standardize(oracle::random_matrix(n, p, 33), {idx});
    for (int trial = 0; trial < 20; ++trial) {
        Vec y = oracle::random_vector(n, 3300 + trial);
        ScreenResult sr = marginal_screen_event(d.X, y);
        Vec x = d.X.col(sr.i_star);
        double z = x.dot(y);
        double p1 = protolasso_pvalue(z, sr.event, x, y, 1.0);
        // y -> -y flips the recorded sign together with Z and mirrors the
        // truncation window; the p-value is unchanged
        Vec y2 = -y;
        ScreenResult sr2 = marginal_screen_event(d.X, y2);
        REQUIRE(sr2.i_star == sr.i_star);
        REQUIRE(sr2.sign == -sr.sign);
        double p2 = protolasso_pvalue(x.dot(y2), sr2.event, x, y2, 1.0);
        CHECK(p1 == doctest::Approx(p2).epsilon(1e-9));
    }
}

TEST_CASE("protolasso null uniformity") {
    const int n = 30, p = 5;
    std::vector<int> idx = {0, 1, 2, 3, 4};
    GroupedDesign d = GroupedDesign::standardize(oracle::random_matrix(n, p, 34), {idx});
    std::vector<double> pvals;
    for (int b = 0; b < 2000; ++b) {
        Vec y = oracle::random_vector(n, 77000 + b);
        ScreenResult sr = marginal_screen_event(d.X, y);
        Vec x = d.X.col(sr.i_star);
        pvals.push_back(protolasso_pvalue(x.dot(y), sr.event, x, y, 1.0));
    }
    CHECK(ks_uniform_statistic(pvals) < 0.035);
}

TEST_CASE("f truncation: no constraints give the plain survival") {
    const int n = 20;
    Mat x = oracle::random_matrix(n, 3, 35);
    HatOperator h = make_hat(x, HatKind::least_squares);
    Vec y = oracle::random_vector(n, 350);
    SelectionEvent empty;
    empty.A.resize(0, n);
    empty.b.resize(0);
    double t = h.quad(y);
    double f = (t / 3.0) / ((y.squaredNorm() - t) / (n - 3));
    CHECK(truncated_f_pvalue(f, empty, h, y, 3, n, 10) ==
          doctest::Approx(f_sf(3.0, n - 3.0, f)).epsilon(1e-10));
}

TEST_CASE("f truncation row boundary closed form") {
    // one row with q > |r|, s = 0: boundary at f = r^2 / (c (q^2 - r^2))
    const int n = 12, m = 2;
    double c = static_cast<double>(m) / (n - m);
    // craft an event row whose coefficients give q = l (A v_N), r = -b, s = 0
    Vec y = Vec::Zero(n);
    y[0] = 3.0;  // component in the prototype direction
    y[1] = 4.0;  // residual direction; l = 5
    Mat basis = Mat::Zero(n, m);
    basis(0, 0) = 1.0;
    basis(2, 1) = 1.0;
    HatOperator h;
    h.basis = basis;
    h.weights = Vec::Ones(m);
    h.kind = HatKind::lasso_refit;
    double l = y.norm();
    SelectionEvent ev;
    ev.A = Mat::Zero(1, n);
    ev.A(0, 0) = 1.0;  // aligned with v_N, orthogonal to v_D
    double q = l * 1.0;
    double r = -2.0;  // b = 2
    ev.b = Vec::Constant(1, 2.0);
    FTruncationRegion region = f_truncation_region(ev, h, y, m, n);
    REQUIRE(region.intervals.size() == 1);
    double f_bound = r * r / (c * (q * q - r * r));
    CHECK(region.intervals[0].first == doctest::Approx(0.0));
    CHECK(region.intervals[0].second == doctest::Approx(f_bound).epsilon(1e-8));
    // endpoint satisfies the row equality
    double u = std::sqrt(c * region.intervals[0].second);
    CHECK(std::fabs(q * u + r * std::sqrt(1.0 + u * u)) < 1e-8 * (std::fabs(q) + std::fabs(r)));
}

TEST_CASE("f truncation region on a real event matches a dense grid of the rows") {
    LassoInstance inst = make_instance(30, 8, 1.1, 36);
    FTruncationRegion region = f_truncation_region(inst.event, inst.hat, inst.y, inst.m, 30);
    double t = inst.hat.quad(inst.y);
    double f_obs = (t / inst.m) / ((inst.y.squaredNorm() - t) / (30 - inst.m));
    CHECK(region.contains(f_obs, 1e-9));

    Vec hy = inst.hat.apply(inst.y);
    Vec ry = inst.y - hy;
    double l = inst.y.norm();
    Vec avn = inst.event.A * (hy / hy.norm());
    Vec avd = inst.event.A * (ry / ry.norm());
    double c = static_cast<double>(inst.m) / (30 - inst.m);
    for (int i = 1; i <= 3000; ++i) {
        double f = 8.0 * f_obs * i / 3000.0;
        bool ok = true;
        for (int j = 0; j < inst.event.rows() && ok; ++j) {
            double val = l * avn[j] * std::sqrt(c * f) - inst.event.b[j] * std::sqrt(1.0 + c * f) +
                         l * avd[j];
            if (val > 1e-9) ok = false;
        }
        bool near_boundary = false;
        for (const auto& [lo2, hi2] : region.intervals) {
            if (std::fabs(f - lo2) < 1e-5 * (1.0 + f)) near_boundary = true;
            if (std::isfinite(hi2) && std::fabs(f - hi2) < 1e-5 * (1.0 + f)) near_boundary = true;
        }
        if (!near_boundary) CHECK(ok == region.contains(f, 0.0));
    }

    // p-value sanity on the same instance
    double p = truncated_f_pvalue(f_obs, inst.event, inst.hat, inst.y, inst.m, 30, 8);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

TEST_CASE("analytic null calibration at alpha = .05/.1") {
    // exact conditional tests at a small geometry
    const int n = 50, p = 20;
    std::vector<int> idx(p);
    for (int j = 0; j < p; ++j) idx[j] = j;
    GroupedDesign d = GroupedDesign::standardize(oracle::random_matrix(n, p, 37), {idx});
    CalibrationResult cal = calibrate_lambda(d.X, 8, 1.0, 50, 370);

    const int reps = 1000;
    int alr_05 = 0, alr_10 = 0, f_05 = 0, f_10 = 0;
    int used = 0;
    for (int b = 0; b < reps; ++b) {
        Vec y = oracle::random_vector(n, 88000 + b);
        LassoSelection sel = lasso_fixed_lambda(d.X, y, cal.lambda);
        if (sel.active.empty()) {
            ++used;  // p = 1 by convention; never rejects
            continue;
        }
        HatOperator h = make_hat(d.columns(sel.active), HatKind::lasso_refit);
        int m = static_cast<int>(sel.active.size());
        SelectionEvent ev = lasso_event(sel, d.X, cal.lambda);
        TruncationBounds bounds = norm_bounds(ev, h, y);
        double w = h.quad(y);
        double alr = (w - m) * (w - m) / (2.0 * m);
        double pa = alr_exact_pvalue(alr, bounds, m, 1.0);
        double f = (w / m) / ((y.squaredNorm() - w) / (n - m));
        double pf = truncated_f_pvalue(f, ev, h, y, m, n, p);
        ++used;
        if (pa <= 0.05) ++alr_05;
        if (pa <= 0.10) ++alr_10;
        if (pf <= 0.05) ++f_05;
        if (pf <= 0.10) ++f_10;
    }
    REQUIRE(used == reps);
    auto band = [&](int hits, double alpha) {
        double rate = static_cast<double>(hits) / reps;
        double se = std::sqrt(alpha * (1.0 - alpha) / reps);
        return std::fabs(rate - alpha) <= 2.0 * se;
    };
    CHECK(band(alr_05, 0.05));
    CHECK(band(alr_10, 0.10));
    CHECK(band(f_05, 0.05));
    CHECK(band(f_10, 0.10));
}

TEST_CASE("elr-chi asymptotic reference calibrates at the documented scale") {
    // the chi2_1-truncated reference is asymptotic in the selected count; at
    // the n=100/p=50/~10-selected geometry it sits inside the 2 SE band
    const int n = 100, p = 50;
    std::vector<int> idx(p);
    for (int j = 0; j < p; ++j) idx[j] = j;
    GroupedDesign d = GroupedDesign::standardize(oracle::random_matrix(n, p, 38), {idx});
    CalibrationResult cal = calibrate_lambda(d.X, 10, 1.0, 50, 380);

    const int reps = 1000;
    int chi_05 = 0, chi_10 = 0;
    for (int b = 0; b < reps; ++b) {
        Vec y = oracle::random_vector(n, 89000 + b);
        LassoSelection sel = lasso_fixed_lambda(d.X, y, cal.lambda);
        if (sel.active.empty()) continue;
        HatOperator h = make_hat(d.columns(sel.active), HatKind::lasso_refit);
        int m = static_cast<int>(sel.active.size());
        SelectionEvent ev = lasso_event(sel, d.X, cal.lambda);
        TruncationBounds bounds = norm_bounds(ev, h, y);
        double w = h.quad(y);
        double relr = m * std::log((double)m) - m * std::log(w) + w - m;
        double pc = elr_chi1_pvalue(relr, bounds, m, 1.0);
        if (pc <= 0.05) ++chi_05;
        if (pc <= 0.10) ++chi_10;
    }
    auto band = [&](int hits, double alpha) {
        double rate = static_cast<double>(hits) / reps;
        double se = std::sqrt(alpha * (1.0 - alpha) / reps);
        return std::fabs(rate - alpha) <= 2.0 * se;
    };
    CHECK(band(chi_05, 0.05));
    CHECK(band(chi_10, 0.10));
}
