#include <cmath>
#include <vector>

#include "accrue/errors.hpp"
#include "accrue/inference.hpp"
#include "accrue/rng.hpp"
#include "doctest.h"

using namespace accrue;

namespace {

TrialSnapshot single_centre_snapshot(int tau, long total) {
  TrialSnapshot snap;
  snap.census_day = tau;
  RecruitmentSeries c;
  c.centre_id = "A";
  c.counts.assign(tau, 0);
  for (long i = 0; i < total; ++i) c.counts[i % tau] += 1;
  snap.centres = {c};
  return snap;
}

TrialSnapshot simulated_snapshot(int n_centres, int tau, double alpha,
                                 double phi, std::uint64_t seed) {
  TrialSnapshot snap;
  snap.census_day = tau;
  for (int c = 0; c < n_centres; ++c) {
    RngStream rng(seed, c);
    double lam = rng.gamma(alpha, alpha / phi);
    RecruitmentSeries s;
    s.centre_id = "C" + std::to_string(c);
    s.counts.assign(tau, 0);
    for (auto& n : s.counts) n = rng.poisson(lam);
    snap.centres.push_back(std::move(s));
  }
  return snap;
}

// importance-weighted posterior mean of exp(x[idx])
double weighted_mean(const ModelFit& fit, int idx) {
  double wsum = 0.0, vsum = 0.0;
  double wmax = *std::max_element(fit.log_weights.begin(),
                                  fit.log_weights.end());
  for (size_t i = 0; i < fit.samples_log.size(); ++i) {
    double w = std::exp(fit.log_weights[i] - wmax);
    wsum += w;
    vsum += w * std::exp(fit.samples_log[i][idx]);
  }
  return vsum / wsum;
}

}  // namespace

TEST_CASE("posterior mode tracks a long constant-rate record") {
  // one centre open 100 days with 10 recruits: the daily-rate scale phi
  // should sit near 0.1
  TrialSnapshot snap = single_centre_snapshot(100, 10);
  PriorConfig prior;
  auto [mode, shape] = find_mode(snap, 0.0, prior);
  CHECK(mode.phi == doctest::Approx(0.1).epsilon(0.25));
  CHECK(shape.rows() == 2);
  // shape matrix symmetric positive definite
  CHECK((shape - shape.transpose()).norm() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("importance sampling recovers the rate scale") {
  TrialSnapshot snap = simulated_snapshot(40, 80, 2.0, 0.12, 99);
  PriorConfig prior;
  ModelFit fit = importance_sample(snap, 0.0, prior, 4000, 5);
  CHECK(fit.kappa == 0.0);
  CHECK(fit.samples_log.size() == fit.log_weights.size());
  CHECK(fit.samples_log.size() >= 4000);
  CHECK(weighted_mean(fit, 1) == doctest::Approx(0.12).epsilon(0.2));
  CHECK(fit.posterior_mean_params().phi ==
        doctest::Approx(weighted_mean(fit, 1)).epsilon(1e-12));

  // effective sample size consistent with its defining formula
  double wmax =
      *std::max_element(fit.log_weights.begin(), fit.log_weights.end());
  double s1 = 0.0, s2 = 0.0;
  for (double lw : fit.log_weights) {
    double w = std::exp(lw - wmax);
    s1 += w;
    s2 += w * w;
  }
  CHECK(fit.ess == doctest::Approx(s1 * s1 / s2).epsilon(1e-10));
  CHECK(fit.ess > 0.0);
  CHECK(fit.ess <= fit.samples_log.size());
}

TEST_CASE("importance sampling is reproducible and seed-sensitive") {
  TrialSnapshot snap = simulated_snapshot(15, 40, 1.5, 0.08, 4);
  PriorConfig prior;
  ModelFit a = importance_sample(snap, 2.0, prior, 800, 42);
  ModelFit b = importance_sample(snap, 2.0, prior, 800, 42);
  REQUIRE(a.samples_log.size() == b.samples_log.size());
  CHECK(a.log_marginal == b.log_marginal);
  for (size_t i = 0; i < a.samples_log.size(); ++i)
    CHECK(a.samples_log[i] == b.samples_log[i]);
  ModelFit c = importance_sample(snap, 2.0, prior, 800, 43);
  CHECK(c.log_marginal != a.log_marginal);
}

TEST_CASE("marginal likelihood matches tensor quadrature on a tiny dataset") {
  // two centres, three days; integrate likelihood x prior over the log
  // parameters by brute-force Simpson in 2-d (constant shape)
  TrialSnapshot snap;
  snap.census_day = 3;
  RecruitmentSeries a, b;
  a.centre_id = "A";
  a.counts = {1, 0, 0};
  b.centre_id = "B";
  b.counts = {0, 2, 0};
  snap.centres = {a, b};
  PriorConfig prior;
  LikelihoodModel lik(snap, 0.0);

  auto f = [&](double la, double lf) {
    Eigen::VectorXd x(2);
    x << la, lf;
    return std::exp(lik.log_likelihood_log(x) +
                    log_prior_log(x, 0.0, prior));
  };
  // integrate over the full phi support and a wide alpha range
  double alo = -8.0, ahi = 9.0, flo = prior.phi_lo, fhi = prior.phi_hi;
  int na = 480, nf = 480;
  double ha = (ahi - alo) / na, hf = (fhi - flo) / nf;
  double total = 0.0;
  for (int i = 0; i <= na; ++i) {
    double wa = (i == 0 || i == na) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (int j = 0; j <= nf; ++j) {
      double wf = (j == 0 || j == nf) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      total += wa * wf * f(alo + i * ha, flo + j * hf);
    }
  }
  double oracle = std::log(total * ha * hf / 9.0);

  ModelFit fit = importance_sample(snap, 0.0, prior, 60000, 12);
  CHECK(std::fabs(std::expm1(fit.log_marginal - oracle)) < 0.02);
}

TEST_CASE("resampling reproduces the weighted posterior mean") {
  TrialSnapshot snap = simulated_snapshot(25, 60, 1.5, 0.1, 8);
  PriorConfig prior;
  ModelFit fit = importance_sample(snap, 0.0, prior, 4000, 9);
  std::vector<ModelParams> draws = resample(fit, 8000, 77);
  REQUIRE(draws.size() == 8000);
  double mean_phi = 0.0;
  for (const auto& p : draws) {
    CHECK(p.kappa == 0.0);
    mean_phi += p.phi;
  }
  mean_phi /= draws.size();
  CHECK(mean_phi == doctest::Approx(weighted_mean(fit, 1)).epsilon(0.02));
  // reproducible
  std::vector<ModelParams> again = resample(fit, 8000, 77);
  CHECK(again[0].phi == draws[0].phi);
  CHECK(again[7999].alpha == draws[7999].alpha);
}

TEST_CASE("model ensemble normalises posterior probabilities") {
  TrialSnapshot snap = simulated_snapshot(20, 50, 1.4, 0.1, 21);
  PriorConfig prior;
  ModelEnsemble ens = fit_all_models(snap, prior, 1500, 31);
  REQUIRE(ens.fits.size() == prior.kappa_grid.size());
  double total = 0.0;
  for (double p : ens.posterior_model_probs) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  // the modal fit is the one with the largest posterior probability
  const ModelFit& modal = ens.modal_fit();
  size_t arg = std::distance(
      ens.posterior_model_probs.begin(),
      std::max_element(ens.posterior_model_probs.begin(),
                       ens.posterior_model_probs.end()));
  CHECK(modal.kappa == ens.fits[arg].kappa);
  // constant-rate data should not be dominated by a decay model
  CHECK(ens.posterior_model_probs[0] > 0.05);
}

TEST_CASE("maximum likelihood recovers the constant-rate scale") {
  TrialSnapshot snap = simulated_snapshot(60, 50, 2.0, 0.15, 13);
  MleFit mle = fit_mle(snap, 0.0);
  double n = static_cast<double>(snap.total_recruits());
  double exposure = 60.0 * 50.0;
  // the phi MLE of the constant-shape model is total / exposure
  CHECK(mle.params.phi == doctest::Approx(n / exposure).epsilon(1e-4));
  CHECK(mle.aic == doctest::Approx(4.0 - 2.0 * mle.log_likelihood));
  CHECK(mle.covariance.rows() == 2);
}

TEST_CASE("aggregate-rate baseline") {
  TrialSnapshot snap = single_centre_snapshot(50, 20);
  CHECK(fit_hpp(snap) == doctest::Approx(20.0 / 50.0));
  TrialSnapshot empty;
  CHECK_THROWS_AS(fit_hpp(empty), ValidationError);
}

TEST_CASE("fitting an empty snapshot fails cleanly") {
  TrialSnapshot empty;
  empty.census_day = 10;
  PriorConfig prior;
  CHECK_THROWS_AS(importance_sample(empty, 0.0, prior, 100, 1), FitError);
}
