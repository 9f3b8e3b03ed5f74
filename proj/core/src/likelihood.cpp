#include "accrue/likelihood.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "accrue/errors.hpp"
#include "accrue/rng.hpp"
#include "accrue/special.hpp"

namespace accrue {

Eigen::VectorXd ModelParams::to_log() const {
  Eigen::VectorXd x(dim());
  x[0] = std::log(alpha);
  x[1] = std::log(phi);
  if (has_theta()) x[2] = std::log(theta);
  return x;
}

ModelParams ModelParams::from_log(const Eigen::VectorXd& x, double kappa) {
  ModelParams p;
  p.kappa = kappa;
  p.alpha = std::exp(x[0]);
  p.phi = std::exp(x[1]);
  p.theta = (kappa != 0.0) ? std::exp(x[2]) : 0.0;
  return p;
}

LikelihoodModel::LikelihoodModel(const TrialSnapshot& snapshot, double kappa)
    : LikelihoodModel(snapshot, kappa, snapshot.mean_open_duration()) {}

LikelihoodModel::LikelihoodModel(const TrialSnapshot& snapshot, double kappa,
                                 double tau_bar)
    : kappa_(kappa), tau_bar_(tau_bar) {
  std::map<int, long> day_totals;
  for (const auto& c : snapshot.centres) {
    if (c.tau() == 0) continue;  // contributes exactly zero
    ++n_centres_;
    long n = c.total();
    total_ += n;
    centre_tau_.push_back(static_cast<double>(c.tau()));
    centre_total_.push_back(n);
    for (int t = 0; t < c.tau(); ++t) {
      long count = c.counts[t];
      if (count == 0) continue;
      day_totals[t + 1] += count;  // model day index is 1-based
      log_factorial_const_ -= log_gamma(static_cast<double>(count) + 1.0);
    }
  }
  day_counts_.assign(day_totals.begin(), day_totals.end());
  if (tau_bar_ <= 0.0) tau_bar_ = 1.0;  // empty snapshot; likelihood is 0
}

CurveShape LikelihoodModel::shape_for(const ModelParams& params) const {
  if (kappa_ == 0.0) return CurveShape::homogeneous(tau_bar_);
  return CurveShape(kappa_, params.theta, tau_bar_);
}

double LikelihoodModel::log_likelihood(const ModelParams& params) const {
  if (!(params.alpha > 0.0) || !(params.phi > 0.0))
    throw std::domain_error("log_likelihood: alpha and phi must be > 0");
  if (n_centres_ == 0) return 0.0;
  const double a = params.alpha, p = params.phi;
  const CurveShape shape = shape_for(params);

  double ll = log_factorial_const_;
  ll += n_centres_ * (a * std::log(a / p) - log_gamma(a));
  for (size_t c = 0; c < centre_tau_.size(); ++c) {
    double g_tau = shape.G(centre_tau_[c]);
    ll += log_gamma(a + centre_total_[c]) -
          (a + centre_total_[c]) * std::log(g_tau + a / p);
  }
  for (const auto& [t, count] : day_counts_)
    ll += count * std::log(shape.G_increment(t));
  if (std::isnan(ll))
    throw FitError("log_likelihood: non-finite value at alpha=" +
                   std::to_string(a) + " phi=" + std::to_string(p) +
                   " theta=" + std::to_string(params.theta));
  return ll;
}

Eigen::VectorXd LikelihoodModel::score(const ModelParams& params) const {
  const double a = params.alpha, p = params.phi;
  const CurveShape shape = shape_for(params);
  const bool with_theta = params.has_theta();

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(with_theta ? 3 : 2);
  grad[0] = n_centres_ * (1.0 + std::log(a / p) - digamma(a));
  grad[1] = -n_centres_ * a / p;
  for (size_t c = 0; c < centre_tau_.size(); ++c) {
    double n = static_cast<double>(centre_total_[c]);
    double g_tau = shape.G(centre_tau_[c]);
    double d = a + p * g_tau;
    grad[0] += digamma(a + n) - std::log(g_tau + a / p) - (a + n) / d;
    grad[1] += a * (a + n) / (p * d);
    if (with_theta)
      grad[2] -= (a + n) * p * shape.dG_dtheta(centre_tau_[c]) / d;
  }
  if (with_theta) {
    for (const auto& [t, count] : day_counts_)
      grad[2] +=
          count * shape.dG_increment_dtheta(t) / shape.G_increment(t);
  }
  return grad;
}

Eigen::MatrixXd LikelihoodModel::observed_information(
    const ModelParams& params) const {
  const double a = params.alpha, p = params.phi;
  const CurveShape shape = shape_for(params);
  const bool with_theta = params.has_theta();
  const int dim = with_theta ? 3 : 2;

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
  info(0, 0) = n_centres_ * (trigamma(a) - 1.0 / a);
  info(1, 1) = -n_centres_ * a / (p * p);
  double i_aphi = n_centres_ / p;
  for (size_t c = 0; c < centre_tau_.size(); ++c) {
    double n = static_cast<double>(centre_total_[c]);
    double g_tau = shape.G(centre_tau_[c]);
    double d = a + p * g_tau;
    double d2 = d * d;
    info(0, 0) += 2.0 / d - (a + n) / d2 - trigamma(a + n);
    info(1, 1) += a * (a + n) * (a + 2.0 * p * g_tau) / (p * p * d2);
    i_aphi -= (a * a + 2.0 * a * p * g_tau + p * g_tau * n) / (p * d2);
    if (with_theta) {
      double dg = shape.dG_dtheta(centre_tau_[c]);
      double ddg = shape.d2G_dtheta2(centre_tau_[c]);
      double gap = g_tau + a / p;
      info(2, 2) += (a + n) * (ddg * gap - dg * dg) / (gap * gap);
      info(0, 2) += p * dg * (p * g_tau - n) / d2;
      info(1, 2) += a * (a + n) * dg / d2;
    }
  }
  info(0, 1) = i_aphi;
  if (with_theta) {
    for (const auto& [t, count] : day_counts_) {
      double h = shape.G_increment(t);
      double dh = shape.dG_increment_dtheta(t);
      double ddh = shape.d2G_increment_dtheta2(t);
      info(2, 2) -= count * (h * ddh - dh * dh) / (h * h);
    }
    info(2, 0) = info(0, 2);
    info(2, 1) = info(1, 2);
  }
  info(1, 0) = info(0, 1);
  return info;
}

Eigen::MatrixXd LikelihoodModel::expected_information(
    const ModelParams& params, int mc_draws, std::uint64_t seed) const {
  const double a = params.alpha, p = params.phi;
  const CurveShape shape = shape_for(params);
  const bool with_theta = params.has_theta();
  const int dim = with_theta ? 3 : 2;

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
  info(0, 0) = n_centres_ * (trigamma(a) - 1.0 / a);
  RngStream rng(seed);
  for (size_t c = 0; c < centre_tau_.size(); ++c) {
    double tau = centre_tau_[c];
    double g_tau = shape.G(tau);
    double d = a + p * g_tau;
    // E[psi'(a + N)] by Monte Carlo, N ~ gamma-Poisson with mean p G(tau)
    double e_tri = 0.0;
    for (int m = 0; m < mc_draws; ++m) {
      double lam = rng.gamma(a, a / p);
      long n = rng.poisson(lam * g_tau);
      e_tri += trigamma(a + static_cast<double>(n));
    }
    e_tri /= mc_draws;
    info(0, 0) += 1.0 / d - e_tri;
    info(1, 1) += (a / p) * g_tau / d;
    if (with_theta) {
      double dg = shape.dG_dtheta(tau);
      double ddg = shape.d2G_dtheta2(tau);
      double gap = g_tau + a / p;
      info(2, 2) += p * (ddg * gap - dg * dg) / gap;
      info(1, 2) += a * dg / d;
      // day term with E[N^(t)] = p (G(t) - G(t-1))
      int tau_days = static_cast<int>(tau);
      for (int t = 1; t <= tau_days; ++t) {
        double h = shape.G_increment(t);
        double dh = shape.dG_increment_dtheta(t);
        double ddh = shape.d2G_increment_dtheta2(t);
        info(2, 2) -= p * (h * ddh - dh * dh) / h;
      }
    }
  }
  // exact orthogonality of (alpha, phi) and (alpha, theta)
  info(0, 1) = info(1, 0) = 0.0;
  if (with_theta) {
    info(0, 2) = info(2, 0) = 0.0;
    info(2, 1) = info(1, 2);
  }
  return info;
}

double LikelihoodModel::log_likelihood_log(const Eigen::VectorXd& x) const {
  return log_likelihood(params_from_log(x));
}

Eigen::VectorXd LikelihoodModel::score_log(const Eigen::VectorXd& x) const {
  ModelParams p = params_from_log(x);
  Eigen::VectorXd g = score(p);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(g.size());
  vals[0] = p.alpha;
  vals[1] = p.phi;
  if (p.has_theta()) vals[2] = p.theta;
  return g.cwiseProduct(vals);
}

Eigen::MatrixXd LikelihoodModel::observed_information_log(
    const Eigen::VectorXd& x) const {
  ModelParams p = params_from_log(x);
  Eigen::VectorXd g = score(p);
  Eigen::MatrixXd info = observed_information(p);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(g.size());
  vals[0] = p.alpha;
  vals[1] = p.phi;
  if (p.has_theta()) vals[2] = p.theta;
  Eigen::MatrixXd out = vals.asDiagonal() * info * vals.asDiagonal();
  for (int i = 0; i < out.rows(); ++i) out(i, i) -= vals[i] * g[i];
  return out;
}

}  // namespace accrue
