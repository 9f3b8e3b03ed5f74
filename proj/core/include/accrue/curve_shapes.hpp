#ifndef ACCRUE_CURVE_SHAPES_HPP_
#define ACCRUE_CURVE_SHAPES_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>

namespace accrue {

inline constexpr double kKappaInf = std::numeric_limits<double>::infinity();

// Normalised decaying intensity shape g(t) with integral G(t), scaled so
// that G(tau_bar) = tau_bar.  kappa = 0 is the constant shape (no theta),
// kappa = inf the exponential tail, finite kappa > 0 the polynomial family.
//
// All evaluations go through the unnormalised integral
//   u(t) = expm1((1-kappa) log1p(theta t / kappa)) / (1-kappa)
// and its theta-derivatives, with dedicated forms at kappa = 1 and inf;
// expm1/log1p keep the ratios accurate when theta t is tiny or kappa is
// close to 1 (the identifiability-limit regimes).
class CurveShape {
 public:
  CurveShape(double kappa, double theta, double tau_bar)
      : kappa_(kappa), theta_(theta), tau_bar_(tau_bar) {
    if (!(tau_bar > 0.0))
      throw std::domain_error("CurveShape: tau_bar must be positive");
    if (kappa_ < 0.0) throw std::domain_error("CurveShape: kappa < 0");
    if (kappa_ != 0.0 && !(theta > 0.0))
      throw std::domain_error("CurveShape: theta must be positive");
    if (kappa_ != 0.0) u_tau_ = u(tau_bar_);
  }

  static CurveShape homogeneous(double tau_bar) {
    return CurveShape(0.0, 0.0, tau_bar);
  }

  double kappa() const { return kappa_; }
  double theta() const { return theta_; }
  double tau_bar() const { return tau_bar_; }
  bool has_theta() const { return kappa_ != 0.0; }

  CurveShape with_theta(double theta) const {
    return CurveShape(kappa_, theta, tau_bar_);
  }

  double g(double t) const {
    if (t < 0.0) throw std::domain_error("CurveShape::g: t < 0");
    if (kappa_ == 0.0) return 1.0;
    return tau_bar_ * g_unnorm(t) / u_tau_;
  }

  double G(double t) const {
    if (t < 0.0) throw std::domain_error("CurveShape::G: t < 0");
    if (kappa_ == 0.0) return t;
    return tau_bar_ * u(t) / u_tau_;
  }

  // G(t) - G(t-1) in a difference-stable form, t >= 1
  double G_increment(double t) const {
    if (kappa_ == 0.0) return 1.0;
    return tau_bar_ * u_diff(t - 1.0, t) / u_tau_;
  }

  double dG_dtheta(double t) const {
    require_theta();
    double ut = u(t), dut = du(t);
    double dutau = du(tau_bar_);
    return tau_bar_ * (dut * u_tau_ - ut * dutau) / (u_tau_ * u_tau_);
  }

  double d2G_dtheta2(double t) const {
    require_theta();
    double ut = u(t), dut = du(t), ddut = ddu(t);
    double dutau = du(tau_bar_), ddutau = ddu(tau_bar_);
    double u2 = u_tau_ * u_tau_;
    return tau_bar_ * (ddut / u_tau_ -
                       (2.0 * dut * dutau + ut * ddutau) / u2 +
                       2.0 * ut * dutau * dutau / (u2 * u_tau_));
  }

  double dG_increment_dtheta(double t) const {
    return dG_dtheta(t) - dG_dtheta(t - 1.0);
  }

  double d2G_increment_dtheta2(double t) const {
    return d2G_dtheta2(t) - d2G_dtheta2(t - 1.0);
  }

 private:
  void require_theta() const {
    if (kappa_ == 0.0)
      throw std::domain_error("CurveShape: kappa = 0 model has no theta");
  }

  bool near_one() const { return std::fabs(kappa_ - 1.0) < 1e-6; }

  double u(double t) const {
    if (std::isinf(kappa_)) return -std::expm1(-theta_ * t);
    if (near_one()) return std::log1p(theta_ * t);
    double om = 1.0 - kappa_;
    return std::expm1(om * std::log1p(theta_ * t / kappa_)) / om;
  }

  // u(t2) - u(t1), 0 <= t1 <= t2
  double u_diff(double t1, double t2) const {
    if (std::isinf(kappa_))
      return -std::exp(-theta_ * t1) * std::expm1(-theta_ * (t2 - t1));
    if (near_one())
      return std::log1p(theta_ * (t2 - t1) / (1.0 + theta_ * t1));
    double om = 1.0 - kappa_;
    double a1 = om * std::log1p(theta_ * t1 / kappa_);
    double da = om * std::log1p(theta_ * (t2 - t1) / (kappa_ + theta_ * t1));
    return std::exp(a1) * std::expm1(da) / om;
  }

  // du/dtheta = (t/kappa)(1 + theta t/kappa)^{-kappa} for finite kappa
  // (exact for the kappa = 1 log form too); t exp(-theta t) at kappa = inf
  double du(double t) const {
    if (std::isinf(kappa_)) return t * std::exp(-theta_ * t);
    return (t / kappa_) *
           std::exp(-kappa_ * std::log1p(theta_ * t / kappa_));
  }

  double ddu(double t) const {
    if (std::isinf(kappa_)) return -t * t * std::exp(-theta_ * t);
    return -(t * t / kappa_) *
           std::exp(-(kappa_ + 1.0) * std::log1p(theta_ * t / kappa_));
  }

  // derivative of u, so that G is exactly the integral of g
  double g_unnorm(double t) const {
    if (std::isinf(kappa_)) return theta_ * std::exp(-theta_ * t);
    return (theta_ / kappa_) *
           std::exp(-kappa_ * std::log1p(theta_ * t / kappa_));
  }

  double kappa_;
  double theta_;
  double tau_bar_;
  double u_tau_ = 1.0;
};

// Weibull-density-proportional shape used as a misspecification truth;
// normalised so G(tau_bar) = tau_bar
class WeibullShape {
 public:
  WeibullShape(double theta, double k, double tau_bar)
      : theta_(theta), k_(k), tau_bar_(tau_bar) {
    if (!(theta > 0.0) || !(k > 0.0))
      throw std::domain_error("WeibullShape: non-positive parameters");
    if (!(tau_bar > 0.0))
      throw std::domain_error("WeibullShape: tau_bar must be positive");
    u_tau_ = -std::expm1(-std::pow(tau_bar_ / theta_, k_));
  }

  double theta() const { return theta_; }
  double k() const { return k_; }
  double tau_bar() const { return tau_bar_; }

  double g(double t) const {
    if (t < 0.0) throw std::domain_error("WeibullShape::g: t < 0");
    double x = std::pow(t / theta_, k_);
    double dens = (t > 0.0 || k_ >= 1.0)
                      ? (k_ / theta_) * std::pow(t / theta_, k_ - 1.0) *
                            std::exp(-x)
                      : std::numeric_limits<double>::infinity();
    return tau_bar_ * dens / u_tau_;
  }

  double G(double t) const {
    if (t < 0.0) throw std::domain_error("WeibullShape::G: t < 0");
    return tau_bar_ * (-std::expm1(-std::pow(t / theta_, k_))) / u_tau_;
  }

  double G_increment(double t) const {
    double x1 = std::pow((t - 1.0) / theta_, k_);
    double x2 = std::pow(t / theta_, k_);
    return tau_bar_ * (-std::exp(-x1) * std::expm1(x1 - x2)) / u_tau_;
  }

 private:
  double theta_;
  double k_;
  double tau_bar_;
  double u_tau_;
};

}  // namespace accrue

#endif  // ACCRUE_CURVE_SHAPES_HPP_
