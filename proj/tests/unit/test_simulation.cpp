#include <cmath>
#include <vector>

#include "accrue/errors.hpp"
#include "accrue/rng.hpp"
#include "accrue/simulation.hpp"
#include "doctest.h"

using namespace accrue;

TEST_CASE("simulated totals match the hierarchical mean") {
  SimConfig cfg;
  cfg.n_centres = 300;
  cfg.trial_days = 200;
  cfg.alpha = 4.0;
  cfg.phi = 0.05;
  cfg.shape = CurveShape::homogeneous(200.0);
  cfg.schedule.kind = ScheduleKind::kExplicit;
  cfg.schedule.explicit_days.assign(300, 0);
  cfg.seed = 12;
  TrialSnapshot snap = simulate_trial(cfg);
  REQUIRE(snap.centres.size() == 300);
  CHECK(snap.census_day == 200);
  for (const auto& c : snap.centres) {
    CHECK(c.initiation_day == 0);
    CHECK(c.tau() == 200);
  }
  // E[total] = C phi tau; var per centre = phi tau + (phi tau)^2 / alpha
  double expect = 300.0 * 0.05 * 200.0;
  double sd = std::sqrt(300.0 * (10.0 + 100.0 / 4.0));
  CHECK(std::fabs(snap.total_recruits() - expect) < 4.0 * sd);
}

TEST_CASE("decaying shape shifts recruits to the early days") {
  SimConfig cfg;
  cfg.n_centres = 200;
  cfg.trial_days = 100;
  cfg.alpha = 2.0;
  cfg.phi = 0.2;
  cfg.shape = CurveShape(2.0, 0.05, 100.0);
  cfg.schedule.kind = ScheduleKind::kExplicit;
  cfg.schedule.explicit_days.assign(200, 0);
  cfg.seed = 5;
  TrialSnapshot snap = simulate_trial(cfg);
  long first = 0, second = 0;
  for (const auto& c : snap.centres)
    for (int t = 0; t < c.tau(); ++t)
      (t < 50 ? first : second) += c.counts[t];
  CHECK(first > second);
  // and the split matches G(50)/G(100) in expectation
  CurveShape g(2.0, 0.05, 100.0);
  double frac = g.G(50.0) / g.G(100.0);
  double total = static_cast<double>(first + second);
  CHECK(first / total == doctest::Approx(frac).epsilon(0.05));
}

TEST_CASE("simulation is reproducible and seed-sensitive") {
  SimConfig cfg;
  cfg.n_centres = 30;
  cfg.trial_days = 60;
  cfg.phi = 0.1;
  cfg.shape = CurveShape::homogeneous(60.0);
  cfg.seed = 99;
  TrialSnapshot a = simulate_trial(cfg);
  TrialSnapshot b = simulate_trial(cfg);
  REQUIRE(a.centres.size() == b.centres.size());
  for (size_t i = 0; i < a.centres.size(); ++i) {
    CHECK(a.centres[i].counts == b.centres[i].counts);
    CHECK(a.centres[i].initiation_day == b.centres[i].initiation_day);
  }
  cfg.seed = 100;
  TrialSnapshot c = simulate_trial(cfg);
  bool any_diff = false;
  for (size_t i = 0; i < a.centres.size(); ++i)
    if (a.centres[i].counts != c.centres[i].counts) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("initiation schedules") {
  SimConfig cfg;
  cfg.n_centres = 400;
  cfg.trial_days = 300;
  cfg.phi = 0.01;
  cfg.shape = CurveShape::homogeneous(300.0);
  cfg.seed = 3;

  cfg.schedule.kind = ScheduleKind::kUniform;
  TrialSnapshot uni = simulate_trial(cfg);
  double mean_day = 0.0;
  for (const auto& c : uni.centres) {
    CHECK(c.initiation_day >= 0);
    CHECK(c.initiation_day < 300);
    mean_day += c.initiation_day;
  }
  mean_day /= 400.0;
  CHECK(mean_day == doctest::Approx(149.5).epsilon(0.1));

  cfg.schedule.kind = ScheduleKind::kClumped;
  cfg.schedule.period_days = 60;
  TrialSnapshot clumped = simulate_trial(cfg);
  for (int i = 0; i < 400; ++i) {
    int cluster = (i % 5) * 60;
    int day = clumped.centres[i].initiation_day;
    CHECK(day >= std::max(0, cluster - 7));
    CHECK(day <= cluster + 7);
  }

  cfg.schedule.kind = ScheduleKind::kTypical;
  TrialSnapshot typical = simulate_trial(cfg);
  double mean_typ = 0.0;
  for (const auto& c : typical.centres) {
    CHECK(c.initiation_day <= 240);  // first 80% of the trial
    mean_typ += c.initiation_day;
  }
  mean_typ /= 400.0;
  // Beta(1,2) has mean 1/3, so about 80 days
  CHECK(mean_typ == doctest::Approx(80.0).epsilon(0.1));

  cfg.schedule.kind = ScheduleKind::kExplicit;
  cfg.schedule.explicit_days.assign(10, 5);
  CHECK_THROWS_AS(simulate_trial(cfg), ValidationError);
}

TEST_CASE("deterministic first recruit adds one on opening day") {
  SimConfig cfg;
  cfg.n_centres = 50;
  cfg.trial_days = 40;
  cfg.phi = 1e-9;  // no stochastic recruits in practice
  cfg.shape = CurveShape::homogeneous(40.0);
  cfg.deterministic_first_recruitment = true;
  cfg.seed = 8;
  TrialSnapshot snap = simulate_trial(cfg);
  CHECK(snap.deterministic_first_recruitment);
  for (const auto& c : snap.centres) {
    if (c.tau() == 0) continue;
    CHECK(c.counts[0] == 1);
    CHECK(c.total() == 1);
  }
}

TEST_CASE("mixture random effect widens the centre totals") {
  SimConfig cfg;
  cfg.n_centres = 400;
  cfg.trial_days = 100;
  cfg.alpha = 50.0;  // tight within component
  cfg.phi = 0.1;
  cfg.shape = CurveShape::homogeneous(100.0);
  cfg.schedule.kind = ScheduleKind::kExplicit;
  cfg.schedule.explicit_days.assign(400, 0);
  cfg.random_effect.kind = RandomEffectKind::kMixture;
  cfg.random_effect.phi1 = 0.02;
  cfg.random_effect.phi2 = 0.18;
  cfg.random_effect.weight = 0.5;
  cfg.seed = 4;
  TrialSnapshot snap = simulate_trial(cfg);
  // mean matches the mixture mean 0.5 (phi1 + phi2) tau per centre
  double expect = 400.0 * 0.5 * (0.02 + 0.18) * 100.0;
  // sd of the total is ~4% of the mean (dominated by the component draw
  // per centre), so allow a little over two standard deviations
  CHECK(std::fabs(snap.total_recruits() - expect) < 0.1 * expect);
  // totals separate into the two components: count centres below/above
  long low = 0, high = 0;
  for (const auto& c : snap.centres) (c.total() < 10 ? low : high) += 1;
  CHECK(low > 120);
  CHECK(high > 120);

  cfg.random_effect.weight = 1.5;
  CHECK_THROWS_AS(simulate_trial(cfg), ValidationError);
}

TEST_CASE("default delay model matches its percentiles") {
  DelayModel dm = default_delay_model();
  auto cdf = [&](double d) {
    return -std::expm1(-std::pow(d / dm.weibull_scale, dm.weibull_shape));
  };
  CHECK(cdf(10.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(cdf(322.0) == doctest::Approx(0.95).epsilon(1e-10));
  double median =
      dm.weibull_scale * std::pow(std::log(2.0), 1.0 / dm.weibull_shape);
  CHECK(median == doctest::Approx(92.2).epsilon(0.01));
}

TEST_CASE("simulated delays add to the planned days reproducibly") {
  DelayModel dm = default_delay_model();
  dm.planned_days = {0, 30, 60, 90};
  auto d1 = simulate_delays(dm, 21);
  auto d2 = simulate_delays(dm, 21);
  REQUIRE(d1.size() == 4);
  CHECK(d1 == d2);
  for (size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] > dm.planned_days[i]);
}

TEST_CASE("censored Weibull fit recovers the generating parameters") {
  DelayModel dm = default_delay_model();
  RngStream rng(77);
  std::vector<DelayObservation> obs;
  const double censor_at = 250.0;
  for (int i = 0; i < 800; ++i) {
    double d = rng.weibull(dm.weibull_scale, dm.weibull_shape);
    DelayObservation o;
    if (d > censor_at) {
      o.delay_days = censor_at;
      o.censored = true;
    } else {
      o.delay_days = std::floor(d);
    }
    obs.push_back(o);
  }
  DelayFit fit = fit_delays_censored(obs);
  CHECK_FALSE(fit.boundary_warning);
  CHECK(fit.scale == doctest::Approx(dm.weibull_scale).epsilon(0.10));
  CHECK(fit.shape == doctest::Approx(dm.weibull_shape).epsilon(0.15));
}

TEST_CASE("censored fit requires at least two uncensored delays") {
  std::vector<DelayObservation> obs(5, DelayObservation{100.0, true});
  CHECK_THROWS_AS(fit_delays_censored(obs), InsufficientDataError);
  obs[0].censored = false;
  CHECK_THROWS_AS(fit_delays_censored(obs), InsufficientDataError);
}
