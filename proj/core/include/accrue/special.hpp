#ifndef ACCRUE_SPECIAL_HPP_
#define ACCRUE_SPECIAL_HPP_

#include <span>
#include <vector>

namespace accrue {

// log Gamma(x), x > 0 (Lanczos approximation, g=7, n=9)
double log_gamma(double x);

// digamma psi(x), x > 0
double digamma(double x);

// trigamma psi'(x), x > 0
double trigamma(double x);

// standard normal upper tail P(Z >= z)
double normal_tail(double z);

// standard normal quantile
double normal_quantile(double p);

// P(chi^2_1 >= x)
double chi2_1_tail(double x);

// regularised lower incomplete gamma P(a, x) and upper Q(a, x) = 1 - P(a, x)
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// quantile of Gamma(shape, rate)
double gamma_quantile(double p, double shape, double rate);

// log Beta(a, b)
double log_beta(double a, double b);

// regularised incomplete beta I_x(a, b)
double beta_cdf(double x, double a, double b);

// log density of Beta(a, b) at x in (0, 1)
double log_beta_pdf(double x, double a, double b);

// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input
double log_sum_exp(std::span<const double> v);

}  // namespace accrue

#endif  // ACCRUE_SPECIAL_HPP_
