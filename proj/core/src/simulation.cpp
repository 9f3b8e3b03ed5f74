#include "accrue/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "accrue/errors.hpp"
#include "accrue/nelder_mead.hpp"
#include "accrue/rng.hpp"

namespace accrue {

namespace {

int schedule_day(const SimConfig& config, int centre, RngStream& rng) {
  const auto& s = config.schedule;
  switch (s.kind) {
    case ScheduleKind::kUniform:
      return static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(config.trial_days)));
    case ScheduleKind::kClumped: {
      int n_clusters = std::max(1, config.trial_days / s.period_days);
      int cluster = (centre % n_clusters) * s.period_days;
      int jitter = static_cast<int>(rng.uniform_int(15)) - 7;
      return std::clamp(cluster + jitter, 0, config.trial_days - 1);
    }
    case ScheduleKind::kExplicit:
      return s.explicit_days.at(static_cast<size_t>(centre));
    case ScheduleKind::kTypical: {
      // front-loaded ramp: Beta(1, 2) over the first 80% of the trial
      double b = rng.beta(1.0, 2.0);
      int day = static_cast<int>(b * 0.8 * config.trial_days);
      return std::min(day, config.trial_days - 1);
    }
  }
  return 0;
}

double draw_random_effect(const SimConfig& config, RngStream& rng) {
  const auto& re = config.random_effect;
  if (re.kind == RandomEffectKind::kGamma)
    return rng.gamma(config.alpha, config.alpha / config.phi);
  double phi = rng.uniform() < re.weight ? re.phi1 : re.phi2;
  return rng.gamma(config.alpha, config.alpha / phi);
}

double shape_increment(const std::variant<CurveShape, WeibullShape>& shape,
                       double t) {
  return std::visit([t](const auto& s) { return s.G_increment(t); }, shape);
}

}  // namespace

TrialSnapshot simulate_trial(const SimConfig& config) {
  if (config.n_centres < 1)
    throw ValidationError("simulate_trial: n_centres must be >= 1");
  if (config.trial_days < 1)
    throw ValidationError("simulate_trial: trial_days must be >= 1");
  if (config.schedule.kind == ScheduleKind::kExplicit &&
      static_cast<int>(config.schedule.explicit_days.size()) !=
          config.n_centres)
    throw ValidationError(
        "simulate_trial: explicit schedule must list one day per centre");
  if (config.random_effect.kind == RandomEffectKind::kMixture &&
      !(config.random_effect.weight > 0.0 &&
        config.random_effect.weight < 1.0))
    throw ValidationError("simulate_trial: mixture weight must be in (0,1)");

  TrialSnapshot snap;
  snap.census_day = config.trial_days;
  snap.target = config.target;
  snap.deterministic_first_recruitment =
      config.deterministic_first_recruitment;

  for (int c = 0; c < config.n_centres; ++c) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(c));
    RecruitmentSeries series;
    char id[16];
    std::snprintf(id, sizeof(id), "C%04d", c + 1);
    series.centre_id = id;
    series.initiation_day = schedule_day(config, c, rng);
    double lambda = draw_random_effect(config, rng);
    int tau = config.trial_days - series.initiation_day;
    series.counts.resize(tau, 0);
    for (int t = 1; t <= tau; ++t)
      series.counts[t - 1] =
          rng.poisson(lambda * shape_increment(config.shape, t));
    if (config.deterministic_first_recruitment && tau > 0)
      series.counts[0] += 1;
    snap.centres.push_back(std::move(series));
  }
  snap.validate();
  return snap;
}

DelayModel default_delay_model() {
  // match P(D <= 10) = 0.05 and P(D <= 322) = 0.95 in closed form
  double a5 = -std::log(0.95);
  double a95 = -std::log(0.05);
  DelayModel dm;
  dm.weibull_shape = std::log(a95 / a5) / std::log(322.0 / 10.0);
  dm.weibull_scale = 10.0 / std::pow(a5, 1.0 / dm.weibull_shape);
  return dm;
}

std::vector<double> simulate_delays(const DelayModel& dm,
                                    std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(dm.planned_days.size());
  for (size_t c = 0; c < dm.planned_days.size(); ++c) {
    RngStream rng(seed, c);
    out.push_back(dm.planned_days[c] +
                  rng.weibull(dm.weibull_scale, dm.weibull_shape));
  }
  return out;
}

DelayFit fit_delays_censored(
    const std::vector<DelayObservation>& observed) {
  int n_uncensored = 0;
  for (const auto& obs : observed)
    if (!obs.censored) ++n_uncensored;
  if (n_uncensored < 2)
    throw InsufficientDataError(
        "fit_delays_censored needs at least 2 uncensored delays");

  // log f = log k - k log s + (k-1) log d - (d/s)^k for uncensored,
  // log S = -(d/s)^k for censored; optimised over (log s, log k)
  auto neg_loglik = [&](const Eigen::VectorXd& x) {
    double log_scale = x[0], log_shape = x[1];
    double k = std::exp(log_shape);
    if (log_shape > 10.0 || log_shape < -10.0) return 1e300;
    double ll = 0.0;
    for (const auto& obs : observed) {
      if (obs.censored) {
        if (obs.delay_days > 0.0)
          ll -= std::exp(k * (std::log(obs.delay_days) - log_scale));
      } else {
        double d = obs.delay_days + 0.5;  // day-resolution midpoint
        ll += log_shape - k * log_scale + (k - 1.0) * std::log(d) -
              std::exp(k * (std::log(d) - log_scale));
      }
    }
    return -ll;
  };

  double mean_d = 0.0;
  for (const auto& obs : observed)
    if (!obs.censored) mean_d += obs.delay_days + 0.5;
  mean_d /= n_uncensored;
  Eigen::VectorXd start(2);
  start << std::log(std::max(mean_d, 1e-3)), 0.0;

  NelderMeadOptions opts;
  opts.max_iterations = 2000;
  auto res = nelder_mead(neg_loglik, start, opts);

  DelayFit fit;
  fit.scale = std::exp(res.x[0]);
  fit.shape = std::exp(res.x[1]);
  fit.boundary_warning = res.x[1] > 9.0 || res.x[1] < -9.0;
  return fit;
}

}  // namespace accrue
