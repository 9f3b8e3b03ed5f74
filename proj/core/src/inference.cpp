#include "accrue/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "accrue/errors.hpp"
#include "accrue/nelder_mead.hpp"
#include "accrue/parallel.hpp"
#include "accrue/rng.hpp"
#include "accrue/special.hpp"

namespace accrue {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTDof = 4.0;
constexpr double kEigenFloor = 1e-8;

struct Proposal {
  Eigen::VectorXd location;
  Eigen::MatrixXd cholesky;  // lower factor of the shape matrix
  double log_norm = 0.0;     // log of the t-density normalising constant

  void init(const Eigen::VectorXd& loc, const Eigen::MatrixXd& shape) {
    location = loc;
    Eigen::LLT<Eigen::MatrixXd> llt(shape);
    if (llt.info() != Eigen::Success)
      throw FitError("importance_sample: proposal shape not PD");
    cholesky = llt.matrixL();
    const double d = static_cast<double>(loc.size());
    double log_det = 0.0;
    for (int i = 0; i < cholesky.rows(); ++i)
      log_det += 2.0 * std::log(cholesky(i, i));
    log_norm = log_gamma(0.5 * (kTDof + d)) - log_gamma(0.5 * kTDof) -
               0.5 * d * std::log(kTDof * 3.14159265358979323846) -
               0.5 * log_det;
  }

  Eigen::VectorXd draw(RngStream& rng) const {
    const int d = static_cast<int>(location.size());
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    double w = rng.chi_squared(kTDof);
    return location + (cholesky * z) * std::sqrt(kTDof / w);
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    Eigen::VectorXd diff = x - location;
    Eigen::VectorXd y =
        cholesky.triangularView<Eigen::Lower>().solve(diff);
    double quad = y.squaredNorm();
    const double d = static_cast<double>(location.size());
    return log_norm - 0.5 * (kTDof + d) * std::log1p(quad / kTDof);
  }
};

// floor eigenvalues so the matrix is safely positive definite
Eigen::MatrixXd floor_pd(const Eigen::MatrixXd& m, bool* floored) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  bool any = false;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] < kEigenFloor) {
      ev[i] = kEigenFloor;
      any = true;
    }
  if (floored) *floored = any;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd inv = es.eigenvalues().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<Eigen::VectorXd> mode_starts(const LikelihoodModel& lik,
                                         const PriorConfig& prior) {
  // crude per-day rate as the phi heuristic
  double tau_sum = lik.n_centres() * lik.tau_bar();
  double crude = tau_sum > 0.0
                     ? std::max(1e-6, lik.total_recruits() / tau_sum)
                     : 1e-3;
  double phi0 = std::clamp(std::log(crude), prior.phi_lo + 0.1,
                           prior.phi_hi - 0.1);
  const bool with_theta = lik.kappa() != 0.0;
  const int dim = with_theta ? 3 : 2;
  double theta0 = std::log(1.0 / prior.theta_t0);

  std::vector<Eigen::VectorXd> starts;
  auto add = [&](double a, double p, double t) {
    Eigen::VectorXd x(dim);
    x[0] = a;
    x[1] = p;
    if (with_theta) x[2] = t;
    starts.push_back(x);
  };
  add(prior.alpha_mean, phi0, theta0);
  add(prior.alpha_mean, phi0, std::log(0.02));
  add(prior.alpha_mean + 0.5, phi0 - 0.7, theta0 + 0.7);
  add(prior.alpha_mean - 0.5, phi0 + 0.7, theta0 - 0.7);
  add(0.0, phi0, -3.0);
  return starts;
}

struct ModeResult {
  Eigen::VectorXd mode_log;
  Eigen::MatrixXd shape;
  bool floored = false;
};

ModeResult find_mode_impl(const LikelihoodModel& lik,
                          const PriorConfig& prior,
                          const OptimizerConfig& optimizer) {
  auto objective = [&](const Eigen::VectorXd& x) -> double {
    double lp = log_prior_log(x, lik.kappa(), prior);
    if (!std::isfinite(lp)) return 1e300;
    double ll;
    try {
      ll = lik.log_likelihood_log(x);
    } catch (const FitError&) {
      return 1e300;
    }
    if (!std::isfinite(ll)) return 1e300;
    return -(ll + lp);
  };

  NelderMeadOptions nm;
  nm.max_iterations = optimizer.max_iterations;
  nm.f_tolerance = optimizer.f_tolerance;
  auto starts = mode_starts(lik, prior);
  if (static_cast<int>(starts.size()) > optimizer.n_starts)
    starts.resize(optimizer.n_starts);

  bool any_converged = false;
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    auto res = nelder_mead(objective, start, nm);
    if (res.converged) any_converged = true;
    if (res.value < best.value) best = res;
  }
  if (!any_converged)
    throw FitError("find_mode: optimiser failed to converge from any start");

  ModeResult out;
  out.mode_log = best.x;
  Eigen::MatrixXd hess;
  bool analytic_ok = true;
  try {
    hess = lik.observed_information_log(best.x);
    hess += prior_curvature_log(best.x, lik.kappa(), prior).asDiagonal();
    if (!hess.allFinite()) analytic_ok = false;
  } catch (const std::exception&) {
    analytic_ok = false;
  }
  if (analytic_ok) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    if (es.eigenvalues().minCoeff() <= 0.0) analytic_ok = false;
  }
  if (!analytic_ok) {
    // central-difference Hessian of the negative log posterior
    const double h = 1e-4;
    const int dim = static_cast<int>(best.x.size());
    hess.resize(dim, dim);
    double f0 = objective(best.x);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        Eigen::VectorXd xpp = best.x, xpm = best.x, xmp = best.x,
                        xmm = best.x;
        xpp[i] += h;
        xpp[j] += h;
        xpm[i] += h;
        xpm[j] -= h;
        xmp[i] -= h;
        xmp[j] += h;
        xmm[i] -= h;
        xmm[j] -= h;
        if (i == j) {
          Eigen::VectorXd xp = best.x, xm = best.x;
          xp[i] += h;
          xm[i] -= h;
          hess(i, i) = (objective(xp) - 2.0 * f0 + objective(xm)) / (h * h);
        } else {
          hess(i, j) = hess(j, i) = (objective(xpp) - objective(xpm) -
                                     objective(xmp) + objective(xmm)) /
                                    (4.0 * h * h);
        }
      }
    }
  }
  Eigen::MatrixXd floored = floor_pd(hess, &out.floored);
  out.shape = invert_spd(floored);
  return out;
}

void require_fittable(const TrialSnapshot& snapshot) {
  for (const auto& c : snapshot.centres)
    if (c.total() > 0) return;
  throw FitError("fit: no recruits observed; phi is unidentified");
}

}  // namespace

ModelParams ModelFit::sample_params(size_t draw) const {
  return ModelParams::from_log(samples_log[draw], kappa);
}

ModelParams ModelFit::posterior_mean_params() const {
  double lse = log_sum_exp(log_weights);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(mode_log.size());
  for (size_t i = 0; i < samples_log.size(); ++i) {
    double w = std::exp(log_weights[i] - lse);
    if (w > 0.0) mean += w * samples_log[i].array().exp().matrix();
  }
  ModelParams p;
  p.kappa = kappa;
  p.alpha = mean[0];
  p.phi = mean[1];
  p.theta = mode_log.size() > 2 ? mean[2] : 0.0;
  return p;
}

const ModelFit& ModelEnsemble::modal_fit() const {
  if (fits.empty()) throw FitError("ensemble is empty");
  size_t best = 0;
  for (size_t k = 1; k < fits.size(); ++k)
    if (posterior_model_probs[k] > posterior_model_probs[best]) best = k;
  return fits[best];
}

std::pair<ModelParams, Eigen::MatrixXd> find_mode(
    const TrialSnapshot& snapshot, double kappa, const PriorConfig& prior,
    const OptimizerConfig& optimizer) {
  require_fittable(snapshot);
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  LikelihoodModel lik(fit_snap, kappa);
  auto mode = find_mode_impl(lik, prior, optimizer);
  return {lik.params_from_log(mode.mode_log), mode.shape};
}

ModelFit importance_sample(const TrialSnapshot& snapshot, double kappa,
                           const PriorConfig& prior, int draws,
                           std::uint64_t seed,
                           const OptimizerConfig& optimizer) {
  if (draws < 1)
    throw std::invalid_argument("importance_sample: draws must be >= 1");
  require_fittable(snapshot);
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  LikelihoodModel lik(fit_snap, kappa);
  auto mode = find_mode_impl(lik, prior, optimizer);

  ModelFit fit;
  fit.kappa = kappa;
  fit.tau_bar = lik.tau_bar();
  fit.mode_log = mode.mode_log;
  fit.mode = lik.params_from_log(mode.mode_log);
  fit.shape_matrix = mode.shape;
  fit.hessian_floored = mode.floored;

  Proposal proposal;
  proposal.init(mode.mode_log, mode.shape);

  for (int attempt = 0; attempt < 2; ++attempt) {
    int b = attempt == 0 ? draws : draws * 10;
    fit.samples_log.assign(b, Eigen::VectorXd());
    fit.log_weights.assign(b, kNegInf);
    parallel_for(b, [&](long i) {
      RngStream rng(seed, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(attempt));
      Eigen::VectorXd x = proposal.draw(rng);
      double lp = log_prior_log(x, kappa, prior);
      if (std::isfinite(lp)) {
        double ll = lik.log_likelihood_log(x);
        if (std::isfinite(ll))
          fit.log_weights[i] = ll + lp - proposal.log_pdf(x);
      }
      fit.samples_log[i] = std::move(x);
    });
    double lse = log_sum_exp(fit.log_weights);
    if (!std::isfinite(lse))
      throw FitError("importance_sample: all weights vanished");
    fit.log_marginal = lse - std::log(static_cast<double>(b));
    double sum_sq = 0.0;
    for (double lw : fit.log_weights) {
      double w = std::exp(lw - lse);
      sum_sq += w * w;
    }
    fit.ess = 1.0 / sum_sq;
    fit.low_ess = fit.ess < static_cast<double>(b) / 10.0;
    if (!fit.low_ess) break;  // retry once with 10x draws
  }
  return fit;
}

std::vector<ModelParams> resample(const ModelFit& fit, int count,
                                  std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("resample: count must be >= 1");
  double lse = log_sum_exp(fit.log_weights);
  std::vector<double> cumulative(fit.log_weights.size());
  double acc = 0.0;
  for (size_t i = 0; i < fit.log_weights.size(); ++i) {
    acc += std::exp(fit.log_weights[i] - lse);
    cumulative[i] = acc;
  }
  cumulative.back() = 1.0;

  RngStream rng(seed);
  std::vector<ModelParams> out;
  out.reserve(count);
  for (int m = 0; m < count; ++m) {
    double u = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    size_t idx = static_cast<size_t>(it - cumulative.begin());
    if (idx >= fit.samples_log.size()) idx = fit.samples_log.size() - 1;
    out.push_back(fit.sample_params(idx));
  }
  return out;
}

ModelEnsemble fit_all_models(const TrialSnapshot& snapshot,
                             const PriorConfig& prior, int draws,
                             std::uint64_t seed,
                             const OptimizerConfig& optimizer) {
  prior.validate();
  const size_t n_models = prior.kappa_grid.size();
  std::vector<std::optional<ModelFit>> fitted(n_models);
  std::vector<std::string> failures(n_models);
  parallel_for(static_cast<long>(n_models), [&](long k) {
    double kappa = prior.kappa_grid[static_cast<size_t>(k)];
    try {
      fitted[k] = importance_sample(
          snapshot, kappa, prior, draws,
          seed + static_cast<std::uint64_t>(k) * 0x100000000ULL, optimizer);
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  });

  ModelEnsemble ensemble;
  std::vector<double> log_posts;
  for (size_t k = 0; k < n_models; ++k) {
    double kappa = prior.kappa_grid[k];
    if (fitted[k]) {
      log_posts.push_back(fitted[k]->log_marginal +
                          prior.model_log_prior(kappa));
      ensemble.fits.push_back(std::move(*fitted[k]));
    } else {
      ensemble.warnings.push_back("model kappa=" + std::to_string(kappa) +
                                  " dropped: " + failures[k]);
    }
  }
  if (ensemble.fits.empty())
    throw FitError("fit_all_models: every model failed to fit");
  double lse = log_sum_exp(log_posts);
  for (double lp : log_posts)
    ensemble.posterior_model_probs.push_back(std::exp(lp - lse));
  ensemble.tau_bar = ensemble.fits.front().tau_bar;
  return ensemble;
}

MleFit fit_mle(const TrialSnapshot& snapshot, double kappa,
               const OptimizerConfig& optimizer) {
  require_fittable(snapshot);
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  LikelihoodModel lik(fit_snap, kappa);
  auto objective = [&](const Eigen::VectorXd& x) -> double {
    if (x.lpNorm<Eigen::Infinity>() > 30.0) return 1e300;
    double ll;
    try {
      ll = lik.log_likelihood_log(x);
    } catch (const FitError&) {
      return 1e300;
    }
    return std::isfinite(ll) ? -ll : 1e300;
  };

  PriorConfig default_prior;  // only used for start heuristics
  NelderMeadOptions nm;
  nm.max_iterations = optimizer.max_iterations;
  nm.f_tolerance = optimizer.f_tolerance;
  bool any_converged = false;
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& start : mode_starts(lik, default_prior)) {
    auto res = nelder_mead(objective, start, nm);
    if (res.converged) any_converged = true;
    if (res.value < best.value) best = res;
  }
  if (!any_converged)
    throw FitError("fit_mle: optimiser failed to converge from any start");

  MleFit out;
  out.params = lik.params_from_log(best.x);
  out.log_likelihood = -best.value;
  out.aic = 2.0 * best.x.size() - 2.0 * out.log_likelihood;
  Eigen::MatrixXd info = lik.observed_information_log(best.x);
  out.covariance = invert_spd(floor_pd(info, nullptr));
  return out;
}

double fit_hpp(const TrialSnapshot& snapshot) {
  if (snapshot.census_day <= 0)
    throw ValidationError("fit_hpp: census_day must be positive");
  return static_cast<double>(snapshot.total_recruits()) /
         static_cast<double>(snapshot.census_day);
}

}  // namespace accrue
