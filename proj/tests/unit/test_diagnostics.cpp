#include <algorithm>
#include <cmath>
#include <vector>

#include "accrue/diagnostics.hpp"
#include "accrue/errors.hpp"
#include "accrue/rng.hpp"
#include "doctest.h"

using namespace accrue;

namespace {

TrialSnapshot gamma_poisson_snapshot(int n_centres, int tau, double alpha,
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

}  // namespace

TEST_CASE("slope of a scaled identity cloud") {
  QQTable t;
  t.theoretical = {1.0, 2.0, 3.0, 4.0};
  t.empirical = {2.0, 4.0, 6.0, 8.0};
  CHECK(t.slope() == doctest::Approx(2.0).epsilon(1e-12));
  t.empirical = {1.0, 2.0, 3.0, 4.0};
  CHECK(t.slope() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random-effect calibration on well-specified data") {
  TrialSnapshot snap = gamma_poisson_snapshot(200, 100, 2.0, 0.1, 31);
  PriorConfig prior;
  ModelFit fit = importance_sample(snap, 0.0, prior, 2000, 7);
  QQTable qq = random_effect_qq(fit, snap);
  CHECK(qq.kind == QQKind::kRandomEffect);
  REQUIRE(qq.theoretical.size() == 200);
  REQUIRE(qq.empirical.size() == 200);
  CHECK(std::is_sorted(qq.theoretical.begin(), qq.theoretical.end()));
  CHECK(std::is_sorted(qq.empirical.begin(), qq.empirical.end()));
  for (size_t i = 1; i < qq.theoretical.size(); ++i)
    CHECK(qq.theoretical[i] > qq.theoretical[i - 1]);
  CHECK(qq.slope() == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("random-effect diagnostic needs at least three centres") {
  TrialSnapshot snap = gamma_poisson_snapshot(2, 30, 2.0, 0.5, 3);
  PriorConfig prior;
  ModelFit fit = importance_sample(snap, 0.0, prior, 500, 7);
  CHECK_THROWS_AS(random_effect_qq(fit, snap), InsufficientDataError);
}

TEST_CASE("initial-period totals against the fitted negative binomial") {
  TrialSnapshot snap = gamma_poisson_snapshot(150, 90, 1.5, 0.2, 8);
  // one centre open fewer than t_prime days must be excluded
  RecruitmentSeries young;
  young.centre_id = "Y";
  young.initiation_day = 50;
  young.counts.assign(40, 1);
  snap.centres.push_back(young);
  PriorConfig prior;
  ModelFit fit = importance_sample(snap, 0.0, prior, 2000, 7);
  QQTable qq = initial_period_qq(fit, snap, 60);
  CHECK(qq.kind == QQKind::kInitialPeriod);
  REQUIRE(qq.empirical.size() == 150);
  REQUIRE(qq.theoretical.size() == 150);
  for (size_t i = 1; i < qq.theoretical.size(); ++i)
    CHECK(qq.theoretical[i] > qq.theoretical[i - 1]);
  CHECK(std::is_sorted(qq.empirical.begin(), qq.empirical.end()));
  CHECK(qq.slope() == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("goodness-of-fit p-value is calibrated on well-specified data") {
  // under the fitted model the rejection rate at level 0.05 must stay
  // close to nominal; the refitting bootstrap keeps it from collapsing
  int rejections = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    TrialSnapshot snap =
        gamma_poisson_snapshot(100, 200, 1.4, 0.05, 400 + rep);
    double p = random_effect_gof_pvalue(snap, 0.0, 199, 900 + rep);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    if (p < 0.05) ++rejections;
  }
  CHECK(rejections <= 2);  // at most 10% of replicates
}

TEST_CASE("goodness-of-fit p-value flags a bimodal rate mixture") {
  // half the centres recruit at ten times the rate of the other half; a
  // single gamma cannot describe that, and with this much exposure the
  // test should see it
  TrialSnapshot snap;
  snap.census_day = 1000;
  RngStream rng(91);
  for (int c = 0; c < 250; ++c) {
    double phi = c % 2 == 0 ? 0.0055 : 0.055;
    double lam = rng.gamma(1.4, 1.4 / phi);
    RecruitmentSeries s;
    s.centre_id = "C" + std::to_string(c);
    s.counts.assign(1000, 0);
    for (auto& n : s.counts) n = rng.poisson(lam);
    snap.centres.push_back(std::move(s));
  }
  double p = random_effect_gof_pvalue(snap, 0.0, 199, 17);
  CHECK(p < 0.05);
}

TEST_CASE("goodness-of-fit p-value is deterministic given a seed") {
  TrialSnapshot snap = gamma_poisson_snapshot(60, 150, 1.4, 0.05, 55);
  double p1 = random_effect_gof_pvalue(snap, 0.0, 99, 5);
  double p2 = random_effect_gof_pvalue(snap, 0.0, 99, 5);
  CHECK(p1 == p2);
  CHECK_THROWS_AS(random_effect_gof_pvalue(snap, 0.0, 0, 5),
                  ValidationError);
}

TEST_CASE("forecast tail probability is two-sided and clipped") {
  ForecastEnsemble fe;
  fe.census_day = 10;
  fe.horizon_days = {11, 12};
  for (long i = 0; i < 100; ++i) fe.paths.push_back({i, i});

  // realised value at the bottom of the path distribution
  CHECK(forecast_pvalue(fe, 0, 12) == doctest::Approx(0.02).epsilon(1e-12));
  // top of the distribution
  CHECK(forecast_pvalue(fe, 99, 12) == doctest::Approx(0.02).epsilon(1e-12));
  // centre: both tails exceed one half, clipped at 1
  CHECK(forecast_pvalue(fe, 50, 12) == doctest::Approx(1.0).epsilon(1e-12));
  // outside the simulated range entirely
  CHECK(forecast_pvalue(fe, 1000, 12) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(forecast_pvalue(fe, 5, 13), ValidationError);
}
