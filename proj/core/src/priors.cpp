#include "accrue/priors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "accrue/errors.hpp"
#include "accrue/special.hpp"
#include "json.hpp"

namespace accrue {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string kappa_key(double kappa) {
  if (std::isinf(kappa)) return "inf";
  double r = std::round(kappa);
  if (r == kappa) return std::to_string(static_cast<long>(r));
  std::string s = std::to_string(kappa);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}
}  // namespace

void PriorConfig::validate() const {
  if (!(alpha_sd > 0.0)) throw ValidationError("prior: alpha sd must be > 0");
  if (!(phi_hi > phi_lo)) throw ValidationError("prior: phi hi <= lo");
  if (!(theta_t0 > 0.0 && theta_a > 0.0 && theta_b > 0.0))
    throw ValidationError("prior: theta t0, a, b must be > 0");
  if (kappa_grid.size() != model_prior.size() || kappa_grid.empty())
    throw ValidationError("prior: kappa grid and model prior size mismatch");
  double sum = 0.0;
  for (double w : model_prior) {
    if (w < 0.0) throw ValidationError("prior: negative model probability");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ValidationError("prior: model probabilities must sum to 1");
}

double PriorConfig::model_log_prior(double kappa) const {
  for (size_t k = 0; k < kappa_grid.size(); ++k)
    if (kappa_grid[k] == kappa)
      return model_prior[k] > 0.0 ? std::log(model_prior[k]) : kNegInf;
  throw std::invalid_argument("model_log_prior: kappa not in grid");
}

PriorConfig PriorConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open priors file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid priors JSON: " + std::string(e.what()));
  }
  PriorConfig config;
  if (j.contains("alpha")) {
    config.alpha_mean = j["alpha"].value("mean", config.alpha_mean);
    config.alpha_sd = j["alpha"].value("sd", config.alpha_sd);
  }
  if (j.contains("phi")) {
    config.phi_lo = j["phi"].value("lo", config.phi_lo);
    config.phi_hi = j["phi"].value("hi", config.phi_hi);
  }
  if (j.contains("theta")) {
    config.theta_t0 = j["theta"].value("t0_days", config.theta_t0);
    config.theta_a = j["theta"].value("a", config.theta_a);
    config.theta_b = j["theta"].value("b", config.theta_b);
  }
  if (j.contains("model_prior")) {
    config.model_prior.clear();
    for (double kappa : config.kappa_grid) {
      auto key = kappa_key(kappa);
      if (!j["model_prior"].contains(key))
        throw ValidationError("priors JSON: missing model_prior entry '" +
                              key + "'");
      config.model_prior.push_back(j["model_prior"][key].get<double>());
    }
  }
  config.validate();
  return config;
}

std::string PriorConfig::to_json() const {
  nlohmann::json j;
  j["alpha"] = {{"mean", alpha_mean}, {"sd", alpha_sd}};
  j["phi"] = {{"lo", phi_lo}, {"hi", phi_hi}};
  j["theta"] = {{"t0_days", theta_t0}, {"a", theta_a}, {"b", theta_b}};
  nlohmann::json mp = nlohmann::json::object();
  for (size_t k = 0; k < kappa_grid.size(); ++k)
    mp[kappa_key(kappa_grid[k])] = model_prior[k];
  j["model_prior"] = mp;
  return j.dump(2);
}

double log_prior_theta(double theta_tilde, double kappa,
                       const PriorConfig& config) {
  if (kappa == 0.0)
    throw std::domain_error("log_prior_theta: kappa = 0 model has no theta");
  const double t0 = config.theta_t0;
  const double a = config.theta_a, b = config.theta_b;
  const double t0_theta = t0 * std::exp(theta_tilde);
  double log_jacobian, r_log;  // r_log = log R, R = g(t0)/g(0)
  if (std::isinf(kappa)) {
    r_log = -t0_theta;
    log_jacobian = std::log(t0) + theta_tilde - t0_theta;
  } else {
    double l1p = std::log1p(t0_theta / kappa);
    r_log = -kappa * l1p;
    log_jacobian = std::log(t0) + theta_tilde - (kappa + 1.0) * l1p;
  }
  // log f_Beta(R; a, b) evaluated in logs for tail stability
  double log_beta_dens = (a - 1.0) * r_log +
                         (b - 1.0) * std::log(-std::expm1(r_log)) -
                         log_beta(a, b);
  return log_jacobian + log_beta_dens;
}

double log_prior(const ModelParams& params, const PriorConfig& config) {
  return log_prior_log(params.to_log(), params.kappa, config);
}

double log_prior_log(const Eigen::VectorXd& x, double kappa,
                     const PriorConfig& config) {
  double lp = 0.0;
  double za = (x[0] - config.alpha_mean) / config.alpha_sd;
  lp += -0.5 * za * za - std::log(config.alpha_sd) -
        0.91893853320467274178032973640562;
  if (x[1] < config.phi_lo || x[1] > config.phi_hi) return kNegInf;
  lp -= std::log(config.phi_hi - config.phi_lo);
  if (kappa != 0.0) lp += log_prior_theta(x[2], kappa, config);
  return lp;
}

Eigen::VectorXd prior_curvature_log(const Eigen::VectorXd& x, double kappa,
                                    const PriorConfig& config) {
  Eigen::VectorXd curv = Eigen::VectorXd::Zero(x.size());
  curv[0] = 1.0 / (config.alpha_sd * config.alpha_sd);
  if (kappa != 0.0) {
    const double h = 1e-4;
    double f0 = log_prior_theta(x[2], kappa, config);
    double fp = log_prior_theta(x[2] + h, kappa, config);
    double fm = log_prior_theta(x[2] - h, kappa, config);
    curv[2] = -(fp - 2.0 * f0 + fm) / (h * h);
  }
  return curv;
}

}  // namespace accrue
