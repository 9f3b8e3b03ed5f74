#ifndef ACCRUE_LIKELIHOOD_HPP_
#define ACCRUE_LIKELIHOOD_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "accrue/curve_shapes.hpp"
#include "accrue/trial_data.hpp"

namespace accrue {

// Hierarchical-model parameters; theta is ignored when kappa = 0.
// Inference works in log coordinates (log alpha, log phi, log theta).
struct ModelParams {
  double alpha = 1.0;
  double phi = 1.0;
  double theta = 0.0;
  double kappa = 0.0;

  bool has_theta() const { return kappa != 0.0; }
  int dim() const { return has_theta() ? 3 : 2; }

  Eigen::VectorXd to_log() const;
  static ModelParams from_log(const Eigen::VectorXd& x, double kappa);
};

// Marginal log-likelihood of the inhomogeneous Poisson-gamma model and its
// derivatives, for one kappa value.  Construction precomputes everything
// that does not depend on the parameters: per-centre totals, counts
// aggregated over local day across centres, and the log n! constant (which
// is included so values are comparable across models).
class LikelihoodModel {
 public:
  LikelihoodModel(const TrialSnapshot& snapshot, double kappa);
  LikelihoodModel(const TrialSnapshot& snapshot, double kappa,
                  double tau_bar);

  double kappa() const { return kappa_; }
  double tau_bar() const { return tau_bar_; }
  long n_centres() const { return n_centres_; }
  long total_recruits() const { return total_; }

  double log_likelihood(const ModelParams& params) const;

  // gradient (d alpha, d phi[, d theta]) in natural coordinates
  Eigen::VectorXd score(const ModelParams& params) const;

  // negative Hessian in natural coordinates; 2x2 when kappa = 0
  Eigen::MatrixXd observed_information(const ModelParams& params) const;

  // Fisher information per the model expectations; the psi'(alpha + N)
  // expectation is approximated by Monte Carlo over N ~ NegBin
  Eigen::MatrixXd expected_information(const ModelParams& params,
                                       int mc_draws = 4096,
                                       std::uint64_t seed = 1) const;

  // log-coordinate wrappers (chain rule through params = exp(x))
  double log_likelihood_log(const Eigen::VectorXd& x) const;
  Eigen::VectorXd score_log(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd observed_information_log(const Eigen::VectorXd& x) const;

  ModelParams params_from_log(const Eigen::VectorXd& x) const {
    return ModelParams::from_log(x, kappa_);
  }

 private:
  CurveShape shape_for(const ModelParams& params) const;

  double kappa_;
  double tau_bar_;
  long n_centres_ = 0;
  long total_ = 0;
  std::vector<double> centre_tau_;   // per centre with tau > 0
  std::vector<long> centre_total_;
  std::vector<std::pair<int, long>> day_counts_;  // (local day, summed count)
  double log_factorial_const_ = 0.0;  // -sum log n!
};

}  // namespace accrue

#endif  // ACCRUE_LIKELIHOOD_HPP_
