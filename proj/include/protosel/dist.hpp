#pragma once

#include <vector>

namespace protosel {

// Standard normal.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_sf(double x);
double norm_logcdf(double x);
double norm_logsf(double x);
double norm_quantile(double p);
// x such that log(1 - Phi(x)) = log_sf; usable arbitrarily deep in the tail.
double norm_quantile_from_logsf(double log_sf);

// Regularized incomplete gamma P(a,x), Q(a,x) and log variants.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);

// Chi-square with (possibly non-integer) df k.
double chi2_cdf(double k, double x);
double chi2_sf(double k, double x);
double chi2_logcdf(double k, double x);
double chi2_logsf(double k, double x);

// Regularized incomplete beta I_x(a,b) and log.
double beta_inc(double a, double b, double x);
double log_beta_inc(double a, double b, double x);

// F distribution with df (d1, d2).
double f_cdf(double d1, double d2, double x);
double f_sf(double d1, double d2, double x);
double f_logcdf(double d1, double d2, double x);
double f_logsf(double d1, double d2, double x);

// Two-sided p-value for a Student t statistic.
double student_t_two_sided_p(double t, double df);

// P(lo <= X <= hi), computed in whichever tail representation avoids
// cancellation. lo/hi may be +-inf.
double chi2_prob_between(double k, double lo, double hi);
double f_prob_between(double d1, double d2, double lo, double hi);

// P(X > x | lo <= X <= hi); truncation windows may sit deep in either tail.
double chi2_trunc_sf(double k, double x, double lo, double hi);
double f_trunc_sf(double d1, double d2, double x, double lo, double hi);
double norm_prob_between(double lo, double hi);
double norm_trunc_sf(double x, double lo, double hi);

// Kolmogorov asymptotic survival Q_KS(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2).
double ks_asymptotic_sf(double t);
// One-sample KS test of pvals against U(0,1); returns the KS p-value.
double ks_uniform_pvalue(std::vector<double> pvals);
double ks_uniform_statistic(std::vector<double> pvals);
// Two-sample KS p-value.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace protosel
