#ifndef ACCRUE_PRIORS_HPP_
#define ACCRUE_PRIORS_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "accrue/likelihood.hpp"

namespace accrue {

// Independent priors on the log parameters: normal on log alpha, uniform
// on log phi, and the curve-shape prior on log theta induced by a
// Beta(a, b) prior on the intensity drop-off ratio R = g(t0)/g(0).
struct PriorConfig {
  double alpha_mean = 0.2;  // on log alpha
  double alpha_sd = 2.0;
  double phi_lo = -8.0;     // on log phi
  double phi_hi = 8.0;
  double theta_t0 = 120.0;  // days
  double theta_a = 1.1;
  double theta_b = 1.1;
  std::vector<double> kappa_grid = {0.0, 0.5, 1.0, 2.0, kKappaInf};
  std::vector<double> model_prior = {0.2, 0.2, 0.2, 0.2, 0.2};

  void validate() const;
  double model_log_prior(double kappa) const;

  static PriorConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

// log prior density of log theta given kappa (kappa != 0)
double log_prior_theta(double theta_tilde, double kappa,
                       const PriorConfig& config);

// joint log prior of the (log-parametrised) model parameters
double log_prior(const ModelParams& params, const PriorConfig& config);

// same, taking the log-coordinate vector directly
double log_prior_log(const Eigen::VectorXd& x, double kappa,
                     const PriorConfig& config);

// curvature (negative second derivative) of the log prior, diagonal in the
// log coordinates; the theta entry uses central differences
Eigen::VectorXd prior_curvature_log(const Eigen::VectorXd& x, double kappa,
                                    const PriorConfig& config);

}  // namespace accrue

#endif  // ACCRUE_PRIORS_HPP_
