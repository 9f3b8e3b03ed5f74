#include "accrue/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "accrue/curve_shapes.hpp"
#include "accrue/errors.hpp"
#include "accrue/parallel.hpp"
#include "accrue/rng.hpp"
#include "accrue/special.hpp"

namespace accrue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CurveShape shape_for(const ModelParams& params, double tau_bar) {
  if (!params.has_theta()) return CurveShape::homogeneous(tau_bar);
  return CurveShape(params.kappa, params.theta, tau_bar);
}

// cumulative normalised weights per fit, for weighted draw selection
std::vector<std::vector<double>> cumulative_weights(
    const ModelEnsemble& ensemble) {
  std::vector<std::vector<double>> cum(ensemble.fits.size());
  for (size_t k = 0; k < ensemble.fits.size(); ++k) {
    const auto& lw = ensemble.fits[k].log_weights;
    double lse = log_sum_exp(lw);
    cum[k].resize(lw.size());
    double acc = 0.0;
    for (size_t i = 0; i < lw.size(); ++i) {
      acc += std::exp(lw[i] - lse);
      cum[k][i] = acc;
    }
    if (!cum[k].empty()) cum[k].back() = 1.0;
  }
  return cum;
}

size_t pick_cumulative(const std::vector<double>& cum, double u) {
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<size_t>(it - cum.begin());
}

// One posterior-predictive parameter draw: model index by posterior model
// probability, then a weighted draw from that fit's importance sample.
ModelParams draw_params(const ModelEnsemble& ensemble,
                        const std::vector<double>& model_cum,
                        const std::vector<std::vector<double>>& weight_cum,
                        RngStream& rng) {
  size_t k = pick_cumulative(model_cum, rng.uniform());
  size_t j = pick_cumulative(weight_cum[k], rng.uniform());
  return ensemble.fits[k].sample_params(j);
}

struct DrawContext {
  ModelParams params;
  CurveShape shape;
  std::vector<double> lambda_open;    // per open centre
  std::vector<double> lambda_future;  // per planned initiation
};

DrawContext draw_centre_rates(const ModelEnsemble& ensemble,
                              const std::vector<double>& model_cum,
                              const std::vector<std::vector<double>>& wcum,
                              const TrialSnapshot& fit_snapshot,
                              RngStream& rng) {
  ModelParams p = draw_params(ensemble, model_cum, wcum, rng);
  CurveShape shape = shape_for(p, ensemble.tau_bar);
  DrawContext ctx{p, shape, {}, {}};
  ctx.lambda_open.reserve(fit_snapshot.centres.size());
  for (const auto& c : fit_snapshot.centres) {
    CentrePosterior cp = centre_posterior(p, c, ensemble.tau_bar);
    ctx.lambda_open.push_back(rng.gamma(cp.alpha_star, cp.rate()));
  }
  ctx.lambda_future.reserve(fit_snapshot.planned_initiations.size());
  for (size_t i = 0; i < fit_snapshot.planned_initiations.size(); ++i)
    ctx.lambda_future.push_back(rng.gamma(p.alpha, p.alpha / p.phi));
  return ctx;
}

void check_ensemble(const ModelEnsemble& ensemble) {
  if (ensemble.fits.empty())
    throw ValidationError("forecast requires a non-empty model ensemble");
  for (const auto& fit : ensemble.fits)
    if (fit.samples_log.empty())
      throw ValidationError("model fit has no posterior samples");
}

}  // namespace

CentrePosterior centre_posterior(const ModelParams& params,
                                 const RecruitmentSeries& series,
                                 double tau_bar) {
  CurveShape shape = shape_for(params, tau_bar);
  double g_tau = shape.G(static_cast<double>(series.tau()));
  double n = static_cast<double>(series.total());
  CentrePosterior cp;
  cp.alpha_star = params.alpha + n;
  cp.phi_star =
      params.phi * cp.alpha_star / (params.alpha + params.phi * g_tau);
  return cp;
}

double predictive_count_pmf(const CentrePosterior& cp, double g_plus,
                            long n) {
  if (n < 0) return 0.0;
  if (g_plus <= 0.0) return n == 0 ? 1.0 : 0.0;
  // NB with shape alpha_star and mean phi_star * g_plus
  double mu = cp.phi_star * g_plus;
  double a = cp.alpha_star;
  double dn = static_cast<double>(n);
  double log_p = log_gamma(a + dn) - log_gamma(a) - log_gamma(dn + 1.0) +
                 a * (std::log(a) - std::log(a + mu)) +
                 dn * (std::log(mu) - std::log(a + mu));
  return std::exp(log_p);
}

std::vector<QuantileBand> ForecastEnsemble::bands(double low,
                                                  double high) const {
  std::vector<QuantileBand> out;
  auto q = forecast_quantiles(*this, {low, high});
  for (size_t d = 0; d < horizon_days.size(); ++d) {
    double mean = 0.0;
    for (const auto& path : paths) mean += static_cast<double>(path[d]);
    mean /= static_cast<double>(paths.size());
    out.push_back({horizon_days[d], q[d][0], mean, q[d][1]});
  }
  return out;
}

ForecastEnsemble sample_accrual_paths(const ModelEnsemble& ensemble,
                                      const TrialSnapshot& snapshot,
                                      int horizon, int draws,
                                      std::uint64_t seed) {
  check_ensemble(ensemble);
  if (horizon < snapshot.census_day)
    throw ValidationError("forecast horizon precedes the census day");
  if (draws < 1) throw ValidationError("draws must be >= 1");

  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  const int n_days = horizon - snapshot.census_day;

  ForecastEnsemble fe;
  fe.census_day = snapshot.census_day;
  fe.base_accrual = snapshot.total_recruits();
  fe.horizon_days.resize(n_days);
  for (int d = 0; d < n_days; ++d)
    fe.horizon_days[d] = snapshot.census_day + 1 + d;
  fe.paths.assign(draws, std::vector<long>(n_days, 0));
  if (n_days == 0) return fe;

  std::vector<double> model_cum(ensemble.posterior_model_probs.size());
  std::partial_sum(ensemble.posterior_model_probs.begin(),
                   ensemble.posterior_model_probs.end(), model_cum.begin());
  if (!model_cum.empty()) model_cum.back() = 1.0;
  auto wcum = cumulative_weights(ensemble);

  // local-day offsets: open centres continue at tau_c + s, future centres
  // start at local day 1 on the day after their initiation
  std::vector<int> open_tau;
  open_tau.reserve(fit_snap.centres.size());
  int max_local = 0;
  for (const auto& c : fit_snap.centres) {
    open_tau.push_back(c.tau());
    max_local = std::max(max_local, c.tau() + n_days);
  }
  for (int d0 : fit_snap.planned_initiations)
    if (horizon > d0) max_local = std::max(max_local, horizon - d0);

  parallel_for(draws, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    DrawContext ctx =
        draw_centre_rates(ensemble, model_cum, wcum, fit_snap, rng);

    std::vector<double> dG(max_local + 1, 0.0);
    for (int l = 1; l <= max_local; ++l)
      dG[l] = ctx.shape.G_increment(static_cast<double>(l));

    auto& path = fe.paths[b];
    long running = fe.base_accrual;
    for (int d = 0; d < n_days; ++d) {
      int day = fe.horizon_days[d];
      double mean = 0.0;
      for (size_t c = 0; c < open_tau.size(); ++c)
        mean += ctx.lambda_open[c] * dG[open_tau[c] + d + 1];
      long deterministic = 0;
      for (size_t c = 0; c < ctx.lambda_future.size(); ++c) {
        int d0 = fit_snap.planned_initiations[c];
        if (day > d0) mean += ctx.lambda_future[c] * dG[day - d0];
        if (snapshot.deterministic_first_recruitment && day == d0)
          ++deterministic;
      }
      // one Poisson draw for the summed intensity across centres
      running += rng.poisson(mean) + deterministic;
      path[d] = running;
    }
  });
  return fe;
}

std::vector<std::vector<double>> forecast_quantiles(
    const ForecastEnsemble& fe, const std::vector<double>& probs) {
  for (double p : probs)
    if (!(p > 0.0 && p < 1.0))
      throw ValidationError("quantile probabilities must lie in (0, 1)");
  const size_t n_days = fe.horizon_days.size();
  const size_t n_draws = fe.paths.size();
  std::vector<std::vector<double>> out(n_days,
                                       std::vector<double>(probs.size()));
  std::vector<double> column(n_draws);
  for (size_t d = 0; d < n_days; ++d) {
    for (size_t b = 0; b < n_draws; ++b)
      column[b] = static_cast<double>(fe.paths[b][d]);
    std::sort(column.begin(), column.end());
    for (size_t j = 0; j < probs.size(); ++j) {
      // linearly interpolated order statistic
      double h = probs[j] * static_cast<double>(n_draws - 1);
      size_t lo = static_cast<size_t>(h);
      double frac = h - static_cast<double>(lo);
      double v = column[lo];
      if (lo + 1 < n_draws) v += frac * (column[lo + 1] - column[lo]);
      out[d][j] = v;
    }
  }
  return out;
}

namespace {

// Integrated future intensity Lambda(t) for one parameter/rate draw,
// measured from the census: open centres continue their local clocks at
// tau_c, future centres start at their planned day.
struct IntensityPath {
  const CurveShape* shape;
  double census;
  const std::vector<double>* lambda_open;
  const std::vector<double>* open_tau;
  const std::vector<double>* lambda_future;
  const std::vector<int>* future_days;

  double operator()(double t) const {
    double total = 0.0;
    for (size_t c = 0; c < lambda_open->size(); ++c) {
      double tau = (*open_tau)[c];
      total += (*lambda_open)[c] *
               (shape->G(tau + (t - census)) - shape->G(tau));
    }
    for (size_t c = 0; c < lambda_future->size(); ++c) {
      double d0 = static_cast<double>((*future_days)[c]);
      if (t > d0) total += (*lambda_future)[c] * shape->G(t - d0);
    }
    return total;
  }
};

// smallest t >= census with Lambda(t) >= target, or +inf when Lambda
// saturates below the target
double invert_intensity(const IntensityPath& lambda, double target,
                        double lo_hint) {
  if (target <= 0.0) return lambda.census;
  double lo = std::max(lo_hint, lambda.census);
  if (lambda(lo) >= target) lo = lambda.census;
  double step = 1.0;
  double hi = lo + step;
  while (lambda(hi) < target) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
    if (hi - lambda.census > 1e12) return kInf;
  }
  while (hi - lo > 1e-6) {
    double mid = 0.5 * (lo + hi);
    if (lambda(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace

CompletionTimes time_to_completion(const ModelEnsemble& ensemble,
                                   const TrialSnapshot& snapshot, long m,
                                   int draws, std::uint64_t seed) {
  check_ensemble(ensemble);
  if (m < 1) throw ValidationError("completion target must be >= 1");
  if (draws < 1) throw ValidationError("draws must be >= 1");

  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  std::vector<double> model_cum(ensemble.posterior_model_probs.size());
  std::partial_sum(ensemble.posterior_model_probs.begin(),
                   ensemble.posterior_model_probs.end(), model_cum.begin());
  if (!model_cum.empty()) model_cum.back() = 1.0;
  auto wcum = cumulative_weights(ensemble);

  std::vector<double> open_tau;
  open_tau.reserve(fit_snap.centres.size());
  for (const auto& c : fit_snap.centres)
    open_tau.push_back(static_cast<double>(c.tau()));
  std::vector<int> future_days = fit_snap.planned_initiations;
  std::sort(future_days.begin(), future_days.end());

  CompletionTimes result;
  result.times.resize(draws);
  const double census = static_cast<double>(snapshot.census_day);

  parallel_for(draws, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b), 1);
    DrawContext ctx =
        draw_centre_rates(ensemble, model_cum, wcum, fit_snap, rng);
    IntensityPath lambda{&ctx.shape, census,          &ctx.lambda_open,
                         &open_tau,  &ctx.lambda_future, &future_days};

    double t;
    if (!snapshot.deterministic_first_recruitment || future_days.empty()) {
      t = invert_intensity(lambda, rng.gamma(static_cast<double>(m), 1.0),
                           census);
    } else {
      // merge the Poisson arrival sequence with the deterministic recruit
      // at each future initiation instant
      long count = 0;
      size_t next_det = 0;
      double s = rng.exponential();
      double t_pois = invert_intensity(lambda, s, census);
      t = kInf;
      while (count < m) {
        double t_det = next_det < future_days.size()
                           ? static_cast<double>(future_days[next_det])
                           : kInf;
        if (t_det <= t_pois) {
          ++count;
          t = t_det;
          ++next_det;
        } else if (std::isfinite(t_pois)) {
          ++count;
          t = t_pois;
          if (count < m) {
            s += rng.exponential();
            t_pois = invert_intensity(lambda, s, t_pois);
          }
        } else {
          t = kInf;  // intensity saturated and no deterministic points left
          break;
        }
      }
    }
    result.times[b] = t;
  });
  for (double t : result.times)
    if (!std::isfinite(t)) ++result.infinite_draws;
  return result;
}

}  // namespace accrue
