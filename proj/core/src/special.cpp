#include "accrue/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace accrue {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Lanczos coefficients, g = 7, n = 9
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  double z = x - 1.0;
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  double t = z + 7.5;
  return 0.91893853320467274178032973640562 + (z + 0.5) * std::log(t) - t +
         std::log(a);
}

double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // asymptotic series with Bernoulli-number coefficients
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result +=
      inv *
      (1.0 + 0.5 * inv +
       inv2 * (1.0 / 6.0 -
               inv2 * (1.0 / 30.0 -
                       inv2 * (1.0 / 42.0 -
                               inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))));
  return result;
}

double normal_tail(double z) {
  return 0.5 * std::erfc(z * 0.70710678118654752440084436210485);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p outside (0,1)");
  // Newton refinement of the Beasley-Springer-Moro style start
  double x = 0.0;
  {
    // Acklam's rational approximation as the starting point
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
      double q = std::sqrt(-2.0 * std::log(p));
      x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
          ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
      double q = p - 0.5;
      double r = q * q;
      x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
           a[5]) *
          q /
          (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
      double q = std::sqrt(-2.0 * std::log1p(-p));
      x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
          ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
  }
  for (int it = 0; it < 3; ++it) {
    double err = (1.0 - normal_tail(x)) - p;
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    if (pdf <= 0.0) break;
    x -= err / pdf;
  }
  return x;
}

double chi2_1_tail(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

namespace {

// lower regularised incomplete gamma by series, valid for x < a + 1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// upper regularised incomplete gamma by continued fraction, x >= a + 1
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw std::domain_error("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw std::domain_error("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double gamma_quantile(double p, double shape, double rate) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::domain_error("gamma_quantile: p outside [0,1)");
  if (!(shape > 0.0 && rate > 0.0))
    throw std::domain_error("gamma_quantile: non-positive parameters");
  if (p == 0.0) return 0.0;
  // Wilson-Hilferty start, then bracketed Newton on P(shape, x): a raw
  // Newton step overshoots badly in the tails where the density is tiny
  double z = normal_quantile(p);
  double g = 2.0 / (9.0 * shape);
  double x = shape * std::pow(1.0 - g + z * std::sqrt(g), 3.0);
  if (!(x > 0.0)) x = shape * std::exp(z / std::sqrt(shape));
  if (!(x > 0.0)) x = 1e-10;
  double lo = 0.0;
  double hi = std::max(x, shape + 1.0);
  while (gamma_p(shape, hi) < p) hi *= 2.0;
  if (!(x > lo && x < hi)) x = 0.5 * hi;
  for (int it = 0; it < 100; ++it) {
    double f = gamma_p(shape, x) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double pdf =
        std::exp((shape - 1.0) * std::log(x) - x - log_gamma(shape));
    double xn = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-13 * (1.0 + x)) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x / rate;
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

namespace {

double beta_cf(double x, double a, double b) {
  const double tiny = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
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
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return h;
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0))
    throw std::domain_error("beta_cdf: non-positive shapes");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(lbt) * beta_cf(x, a, b) / a;
  return 1.0 - std::exp(lbt) * beta_cf(1.0 - x, b, a) / b;
}

double log_beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         log_beta(a, b);
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

}  // namespace accrue
