#ifndef ACCRUE_INFERENCE_HPP_
#define ACCRUE_INFERENCE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "accrue/likelihood.hpp"
#include "accrue/priors.hpp"
#include "accrue/trial_data.hpp"

namespace accrue {

struct OptimizerConfig {
  int max_iterations = 5000;
  int n_starts = 5;
  double f_tolerance = 1e-11;
};

// Importance-sampling fit of a single kappa model: posterior draws in log
// coordinates with unnormalised log weights, marginal-likelihood estimate
// and effective sample size.
struct ModelFit {
  double kappa = 0.0;
  double tau_bar = 0.0;
  ModelParams mode;
  Eigen::VectorXd mode_log;
  Eigen::MatrixXd shape_matrix;  // proposal shape, log coordinates
  std::vector<Eigen::VectorXd> samples_log;
  std::vector<double> log_weights;
  double log_marginal = 0.0;
  double ess = 0.0;
  bool low_ess = false;
  bool hessian_floored = false;

  ModelParams sample_params(size_t draw) const;
  // importance-weighted posterior means in natural coordinates
  ModelParams posterior_mean_params() const;
};

struct ModelEnsemble {
  std::vector<ModelFit> fits;
  std::vector<double> posterior_model_probs;
  double tau_bar = 0.0;
  std::vector<std::string> warnings;

  const ModelFit& modal_fit() const;
};

// Posterior mode in log coordinates by multi-start Nelder-Mead; the second
// member is the proposal shape matrix (inverse of the observed information
// plus prior curvature, eigenvalue-floored to stay positive definite).
std::pair<ModelParams, Eigen::MatrixXd> find_mode(
    const TrialSnapshot& snapshot, double kappa, const PriorConfig& prior,
    const OptimizerConfig& optimizer = {});

// Multivariate-t(4) importance sampler around the posterior mode; retries
// once with 10x the draws when ESS falls below draws/10.
ModelFit importance_sample(const TrialSnapshot& snapshot, double kappa,
                           const PriorConfig& prior, int draws,
                           std::uint64_t seed,
                           const OptimizerConfig& optimizer = {});

// Multinomial resampling proportional to the weights.
std::vector<ModelParams> resample(const ModelFit& fit, int count,
                                  std::uint64_t seed);

// Fit every kappa in the prior's grid and convert marginal likelihoods to
// posterior model probabilities; failed fits are dropped with a warning.
ModelEnsemble fit_all_models(const TrialSnapshot& snapshot,
                             const PriorConfig& prior, int draws,
                             std::uint64_t seed,
                             const OptimizerConfig& optimizer = {});

struct MleFit {
  ModelParams params;
  Eigen::MatrixXd covariance;  // inverse observed information, log coords
  double log_likelihood = 0.0;
  double aic = 0.0;
};

MleFit fit_mle(const TrialSnapshot& snapshot, double kappa,
               const OptimizerConfig& optimizer = {});

// Homogeneous-Poisson-process rate fitted to aggregate accrual only.
double fit_hpp(const TrialSnapshot& snapshot);

}  // namespace accrue

#endif  // ACCRUE_INFERENCE_HPP_
