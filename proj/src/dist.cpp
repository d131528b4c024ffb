#include "protosel/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

// Mills-ratio continued fraction for the upper tail, valid for large x > 0:
// 1-Phi(x) = phi(x) * 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
double mills_cf(double x) {
    double cf = 0.0;
    for (int k = 80; k >= 1; --k) cf = static_cast<double>(k) / (x + cf);
    return 1.0 / (x + cf);
}

}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double norm_logsf(double x) {
    if (x < 26.0) {
        double s = norm_sf(x);
        if (s > 0.0) return std::log(s);
    }
    // erfc underflows around x ~ 37.5; the continued fraction is accurate
    // well before that point
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_cf(x));
}

double norm_logcdf(double x) { return norm_logsf(-x); }

// Wichura's AS 241 (PPND16): double-precision inverse normal CDF.
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        throw std::invalid_argument("norm_quantile: p outside [0,1]");
    }
    double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r +
                  1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r +
                  6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r +
                1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r +
                   1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r +
                 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r +
               1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r +
                 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r +
                 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r +
               6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r +
                 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r +
               1.0);
    }
    return q < 0.0 ? -val : val;
}

double norm_quantile_from_logsf(double log_sf) {
    if (log_sf >= 0.0) return -kInf;
    // d logsf/dx = -phi(x)/sf(x), assembled in log space to dodge underflow
    auto polish = [log_sf](double x, int iters) {
        for (int it = 0; it < iters; ++it) {
            double lsf = norm_logsf(x);
            double deriv = -std::exp(-0.5 * x * x - kLogSqrt2Pi - lsf);
            double step = (lsf - log_sf) / deriv;
            if (!std::isfinite(step)) break;
            x -= step;
            if (std::fabs(step) < 1e-14 * (1.0 + std::fabs(x))) break;
        }
        return x;
    };
    // 1 - exp(log_sf) must stay resolvable below 1.0 for the direct start
    if (log_sf > -34.0) return polish(norm_quantile(1.0 - std::exp(log_sf)), 4);
    // asymptotic start: logsf ~ -x^2/2 - log x - log sqrt(2 pi)
    double x = std::sqrt(std::max(0.0, -2.0 * (log_sf + kLogSqrt2Pi)));
    for (int it = 0; it < 2; ++it)
        x = std::sqrt(std::max(0.0, -2.0 * (log_sf + kLogSqrt2Pi + std::log(std::max(x, 1.0)))));
    return polish(x, 8);
}

namespace {

// Series for P(a,x), x < a+1. Returns log P.
double log_gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
    }
    return -x + a * std::log(x) - std::lgamma(a) + std::log(sum);
}

// Lentz continued fraction for Q(a,x), x >= a+1. Returns log Q.
double log_gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

}  // namespace

double log_gamma_p(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("log_gamma_p: a <= 0");
    if (x < 0.0) throw std::invalid_argument("log_gamma_p: x < 0");
    if (x == 0.0) return -kInf;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return log_gamma_p_series(a, x);
    double q = std::exp(log_gamma_q_cf(a, x));
    return std::log1p(-q);
}

double log_gamma_q(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("log_gamma_q: a <= 0");
    if (x < 0.0) throw std::invalid_argument("log_gamma_q: x < 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    if (x >= a + 1.0) return log_gamma_q_cf(a, x);
    double p = std::exp(log_gamma_p_series(a, x));
    return std::log1p(-p);
}

double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }
double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

double chi2_cdf(double k, double x) { return x <= 0.0 ? 0.0 : gamma_p(0.5 * k, 0.5 * x); }
double chi2_sf(double k, double x) { return x <= 0.0 ? 1.0 : gamma_q(0.5 * k, 0.5 * x); }
double chi2_logcdf(double k, double x) { return x <= 0.0 ? -kInf : log_gamma_p(0.5 * k, 0.5 * x); }
double chi2_logsf(double k, double x) { return x <= 0.0 ? 0.0 : log_gamma_q(0.5 * k, 0.5 * x); }

namespace {

// Lentz continued fraction for the incomplete beta; valid for
// x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return h;
}

double log_beta_inc_direct(double a, double b, double x) {
    // log of the regularized incomplete beta in the regime where the series
    // side is the small one
    double lpre = a * std::log(x) + b * std::log1p(-x) - std::lgamma(a) - std::lgamma(b) +
                  std::lgamma(a + b);
    return lpre + std::log(beta_cf(a, b, x) / a);
}

}  // namespace

double log_beta_inc(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("log_beta_inc: a,b must be > 0");
    if (x <= 0.0) return -kInf;
    if (x >= 1.0) return 0.0;
    if (x < (a + 1.0) / (a + b + 2.0)) return log_beta_inc_direct(a, b, x);
    double other = std::exp(log_beta_inc_direct(b, a, 1.0 - x));
    return std::log1p(-other);
}

double beta_inc(double a, double b, double x) { return std::exp(log_beta_inc(a, b, x)); }

double f_cdf(double d1, double d2, double x) {
    if (x <= 0.0) return 0.0;
    return beta_inc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double f_sf(double d1, double d2, double x) {
    if (x <= 0.0) return 1.0;
    return beta_inc(0.5 * d2, 0.5 * d1, d2 / (d1 * x + d2));
}

double f_logcdf(double d1, double d2, double x) {
    if (x <= 0.0) return -kInf;
    if (std::isinf(x)) return 0.0;
    return log_beta_inc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double f_logsf(double d1, double d2, double x) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    return log_beta_inc(0.5 * d2, 0.5 * d1, d2 / (d1 * x + d2));
}

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return std::isnan(t) ? std::nan("") : 0.0;
    return beta_inc(0.5 * df, 0.5, df / (df + t * t));
}

namespace {

// Generic stable window probability from log-cdf/log-sf callables.
template <typename LogCdf, typename LogSf>
double prob_between_impl(LogCdf lcdf, LogSf lsf, double lo, double hi) {
    if (!(lo < hi)) return 0.0;
    double lsf_lo = lsf(lo);
    double lsf_hi = lsf(hi);
    double lcdf_lo = lcdf(lo);
    double lcdf_hi = lcdf(hi);
    // pick the representation where the window lives in the small tail
    if (lsf_lo < std::log(0.5)) {
        // upper tail: sf(lo) - sf(hi)
        return std::exp(lsf_lo) * -std::expm1(lsf_hi - lsf_lo);
    }
    if (lcdf_hi < std::log(0.5)) {
        // lower tail: cdf(hi) - cdf(lo)
        return std::exp(lcdf_hi) * -std::expm1(lcdf_lo - lcdf_hi);
    }
    return std::exp(lcdf_hi) - std::exp(lcdf_lo);
}

// P(X > x | lo <= X <= hi) from log-cdf/log-sf callables.
template <typename LogCdf, typename LogSf>
double trunc_sf_impl(LogCdf lcdf, LogSf lsf, double x, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("trunc_sf: empty window");
    x = std::clamp(x, lo, hi);
    double lsf_lo = lsf(lo);
    if (lsf_lo < std::log(0.5)) {
        // window in the upper tail; everything in sf space
        double lsf_x = lsf(x);
        double lsf_hi = lsf(hi);
        double num = -std::expm1(lsf_hi - lsf_x);      // 1 - sf(hi)/sf(x)
        double den = -std::expm1(lsf_hi - lsf_lo);     // 1 - sf(hi)/sf(lo)
        if (den <= 0.0) return 1.0;
        return std::clamp(std::exp(lsf_x - lsf_lo) * num / den, 0.0, 1.0);
    }
    double lcdf_hi = lcdf(hi);
    if (lcdf_hi < std::log(0.5)) {
        // window in the lower tail; complement in cdf space
        double lcdf_x = lcdf(x);
        double lcdf_lo = lcdf(lo);
        double num = -std::expm1(lcdf_lo - lcdf_x);
        double den = -std::expm1(lcdf_lo - lcdf_hi);
        if (den <= 0.0) return 1.0;
        double below = std::exp(lcdf_x - lcdf_hi) * num / den;
        return std::clamp(1.0 - below, 0.0, 1.0);
    }
    // window straddles the bulk: denominator is O(1), numerator done in sf
    // space so a deep-tail x keeps relative accuracy
    double num = std::exp(lsf(x)) * -std::expm1(lsf(hi) - lsf(x));
    double den = std::exp(lcdf(hi)) - std::exp(lcdf(lo));
    if (den <= 0.0) return 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace

double chi2_prob_between(double k, double lo, double hi) {
    lo = std::max(lo, 0.0);
    return prob_between_impl([k](double v) { return chi2_logcdf(k, v); },
                             [k](double v) { return chi2_logsf(k, v); }, lo, hi);
}

double f_prob_between(double d1, double d2, double lo, double hi) {
    lo = std::max(lo, 0.0);
    return prob_between_impl([&](double v) { return f_logcdf(d1, d2, v); },
                             [&](double v) { return f_logsf(d1, d2, v); }, lo, hi);
}

double chi2_trunc_sf(double k, double x, double lo, double hi) {
    lo = std::max(lo, 0.0);
    return trunc_sf_impl([k](double v) { return chi2_logcdf(k, v); },
                         [k](double v) { return chi2_logsf(k, v); }, x, lo, hi);
}

double f_trunc_sf(double d1, double d2, double x, double lo, double hi) {
    lo = std::max(lo, 0.0);
    return trunc_sf_impl([&](double v) { return f_logcdf(d1, d2, v); },
                         [&](double v) { return f_logsf(d1, d2, v); }, x, lo, hi);
}

double norm_prob_between(double lo, double hi) {
    return prob_between_impl([](double v) { return norm_logcdf(v); },
                             [](double v) { return norm_logsf(v); }, lo, hi);
}

double norm_trunc_sf(double x, double lo, double hi) {
    return trunc_sf_impl([](double v) { return norm_logcdf(v); },
                         [](double v) { return norm_logsf(v); }, x, lo, hi);
}

double ks_asymptotic_sf(double t) {
    if (t <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::exp(-2.0 * j * j * t * t);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ks_uniform_statistic(std::vector<double> pvals) {
    std::sort(pvals.begin(), pvals.end());
    const double n = static_cast<double>(pvals.size());
    double d = 0.0;
    for (std::size_t i = 0; i < pvals.size(); ++i) {
        double hi = (static_cast<double>(i) + 1.0) / n - pvals[i];
        double lo = pvals[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return d;
}

double ks_uniform_pvalue(std::vector<double> pvals) {
    if (pvals.empty()) return 1.0;
    double n = static_cast<double>(pvals.size());
    double d = ks_uniform_statistic(std::move(pvals));
    // Stephens' small-sample adjustment
    double t = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    return ks_asymptotic_sf(t);
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 1.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double va = a[i], vb = b[j];
        if (va <= vb) ++i;
        if (vb <= va) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    double t = d * (ne + 0.12 + 0.11 / ne);
    return ks_asymptotic_sf(t);
}

}  // namespace protosel
