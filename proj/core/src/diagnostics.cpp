#include "accrue/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "accrue/curve_shapes.hpp"
#include "accrue/errors.hpp"
#include "accrue/likelihood.hpp"
#include "accrue/parallel.hpp"
#include "accrue/rng.hpp"
#include "accrue/special.hpp"

namespace accrue {

double QQTable::slope() const {
  double n = static_cast<double>(theoretical.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < theoretical.size(); ++i) {
    mx += theoretical[i];
    my += empirical[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < theoretical.size(); ++i) {
    sxy += (theoretical[i] - mx) * (empirical[i] - my);
    sxx += (theoretical[i] - mx) * (theoretical[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

QQTable random_effect_qq(const ModelFit& fit,
                         const TrialSnapshot& snapshot) {
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  if (fit_snap.centres.size() < 3)
    throw InsufficientDataError(
        "random_effect_qq needs at least 3 centres");

  ModelParams hat = fit.posterior_mean_params();
  CurveShape shape = hat.has_theta()
                         ? CurveShape(hat.kappa, hat.theta, fit.tau_bar)
                         : CurveShape::homogeneous(fit.tau_bar);

  QQTable table;
  table.kind = QQKind::kRandomEffect;
  for (const auto& c : fit_snap.centres) {
    double g_tau = shape.G(static_cast<double>(c.tau()));
    double n = static_cast<double>(c.total());
    // posterior mean of the centre's random effect
    table.empirical.push_back(hat.phi * (hat.alpha + n) /
                              (hat.alpha + hat.phi * g_tau));
  }
  std::sort(table.empirical.begin(), table.empirical.end());

  size_t n_centres = table.empirical.size();
  for (size_t i = 0; i < n_centres; ++i) {
    double p = (static_cast<double>(i) + 0.5) /
               static_cast<double>(n_centres);
    table.theoretical.push_back(
        gamma_quantile(p, hat.alpha, hat.alpha / hat.phi));
  }
  return table;
}

namespace {

// smallest n with NB CDF >= p, for shape a and mean mu
double nb_quantile(double p, double a, double mu) {
  double log_pmf = a * (std::log(a) - std::log(a + mu));  // P(0)
  double cdf = std::exp(log_pmf);
  long n = 0;
  double log_ratio_base = std::log(mu) - std::log(a + mu);
  while (cdf < p && n < 100000000L) {
    ++n;
    log_pmf += std::log(a + static_cast<double>(n) - 1.0) -
               std::log(static_cast<double>(n)) + log_ratio_base;
    cdf += std::exp(log_pmf);
  }
  return static_cast<double>(n);
}

}  // namespace

QQTable initial_period_qq(const ModelFit& fit,
                          const TrialSnapshot& snapshot, int t_prime) {
  if (t_prime < 1)
    throw ValidationError("initial_period_qq: t_prime must be >= 1");
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);

  QQTable table;
  table.kind = QQKind::kInitialPeriod;
  for (const auto& c : fit_snap.centres) {
    if (c.tau() < t_prime) continue;
    long total = 0;
    for (int t = 0; t < t_prime; ++t) total += c.counts[t];
    table.empirical.push_back(static_cast<double>(total));
  }
  if (table.empirical.size() < 3)
    throw InsufficientDataError(
        "initial_period_qq needs at least 3 centres open " +
        std::to_string(t_prime) + " days");
  std::sort(table.empirical.begin(), table.empirical.end());

  ModelParams hat = fit.posterior_mean_params();
  CurveShape shape = hat.has_theta()
                         ? CurveShape(hat.kappa, hat.theta, fit.tau_bar)
                         : CurveShape::homogeneous(fit.tau_bar);
  double mu = hat.phi * shape.G(static_cast<double>(t_prime));

  size_t n = table.empirical.size();
  double last = -1.0;
  for (size_t i = 0; i < n; ++i) {
    double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double q = nb_quantile(p, hat.alpha, mu);
    // keep the theoretical axis strictly increasing despite discreteness
    if (q <= last) q = last + 1e-9;
    table.theoretical.push_back(q);
    last = q;
  }
  return table;
}

namespace {

// maximum-likelihood fit in log coordinates by damped Newton from a
// deterministic moment-based start; the same routine is applied to the
// observed data and to every bootstrap replicate so the two are
// exchangeable under the fitted model
Eigen::VectorXd mle_log(const TrialSnapshot& snapshot, double kappa) {
  LikelihoodModel lik(snapshot, kappa);
  int dim = kappa == 0.0 ? 2 : 3;
  const double theta0 = 0.01;
  CurveShape start_shape = kappa == 0.0
                               ? CurveShape::homogeneous(lik.tau_bar())
                               : CurveShape(kappa, theta0, lik.tau_bar());
  double g_sum = 0.0;
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  for (const auto& c : fit_snap.centres)
    g_sum += start_shape.G(static_cast<double>(c.tau()));
  Eigen::VectorXd x(dim);
  x[0] = 0.0;
  x[1] = std::log(std::max(1.0, static_cast<double>(lik.total_recruits())) /
                  g_sum);
  if (dim == 3) x[2] = std::log(theta0);
  double f = lik.log_likelihood_log(x);
  for (int it = 0; it < 80; ++it) {
    Eigen::VectorXd g = lik.score_log(x);
    Eigen::MatrixXd info = lik.observed_information_log(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-6);
    Eigen::VectorXd step =
        es.eigenvectors() *
        (es.eigenvectors().transpose() * g).cwiseQuotient(ev);
    bool moved = false;
    double t = 1.0;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      Eigen::VectorXd xn = x + t * step;
      double fn = lik.log_likelihood_log(xn);
      if (std::isfinite(fn) && fn >= f) {
        bool converged = fn - f < 1e-10 && g.norm() < 1e-7;
        x = xn;
        f = fn;
        moved = true;
        if (converged) return x;
        break;
      }
    }
    if (!moved) break;
  }
  return x;
}

// Cramer-von Mises distance of the probability-transformed posterior-mean
// random effects from uniformity, all at the replicate's own ML fit
double cvm_statistic(const Eigen::VectorXd& x_log, double kappa,
                     double tau_bar, const std::vector<double>& tau,
                     const std::vector<long>& totals) {
  double alpha = std::exp(x_log[0]);
  double phi = std::exp(x_log[1]);
  CurveShape shape = kappa == 0.0
                         ? CurveShape::homogeneous(tau_bar)
                         : CurveShape(kappa, std::exp(x_log[2]), tau_bar);
  std::vector<double> u;
  u.reserve(tau.size());
  for (size_t i = 0; i < tau.size(); ++i) {
    double g = shape.G(tau[i]);
    double mean = phi * (alpha + static_cast<double>(totals[i])) /
                  (alpha + phi * g);
    u.push_back(gamma_p(alpha, mean * alpha / phi));
  }
  std::sort(u.begin(), u.end());
  double n = static_cast<double>(u.size());
  double w2 = 1.0 / (12.0 * n);
  for (size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n);
    w2 += d * d;
  }
  return w2;
}

}  // namespace

double random_effect_gof_pvalue(const TrialSnapshot& snapshot, double kappa,
                                int n_bootstrap, std::uint64_t seed) {
  if (n_bootstrap < 1)
    throw ValidationError(
        "random_effect_gof_pvalue: n_bootstrap must be >= 1");
  TrialSnapshot fit_snap = snapshot_for_fitting(snapshot);
  if (fit_snap.centres.size() < 3)
    throw InsufficientDataError(
        "random_effect_gof_pvalue needs at least 3 centres");

  Eigen::VectorXd x_hat = mle_log(snapshot, kappa);
  double tau_bar = LikelihoodModel(snapshot, kappa).tau_bar();
  std::vector<double> tau;
  std::vector<long> totals;
  for (const auto& c : fit_snap.centres) {
    tau.push_back(static_cast<double>(c.tau()));
    totals.push_back(c.total());
  }
  double observed = cvm_statistic(x_hat, kappa, tau_bar, tau, totals);

  double alpha = std::exp(x_hat[0]);
  double phi = std::exp(x_hat[1]);
  CurveShape shape = kappa == 0.0
                         ? CurveShape::homogeneous(tau_bar)
                         : CurveShape(kappa, std::exp(x_hat[2]), tau_bar);
  std::vector<double> stats(n_bootstrap);
  parallel_for(n_bootstrap, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    TrialSnapshot replicate = fit_snap;
    for (auto& c : replicate.centres) {
      double lambda = rng.gamma(alpha, alpha / phi);
      std::fill(c.counts.begin(), c.counts.end(), 0L);
      if (kappa == 0.0) {
        // the homogeneous likelihood only sees the totals, so one draw of
        // the whole-period count suffices
        if (!c.counts.empty())
          c.counts[0] =
              rng.poisson(lambda * shape.G(static_cast<double>(c.tau())));
      } else {
        for (int d = 0; d < c.tau(); ++d)
          c.counts[d] = rng.poisson(
              lambda * (shape.G(static_cast<double>(d + 1)) -
                        shape.G(static_cast<double>(d))));
      }
    }
    Eigen::VectorXd x_b = mle_log(replicate, kappa);
    std::vector<long> rep_totals;
    for (const auto& c : replicate.centres) rep_totals.push_back(c.total());
    stats[b] = cvm_statistic(x_b, kappa, tau_bar, tau, rep_totals);
  });

  long exceed = 0;
  for (double s : stats)
    if (s >= observed) ++exceed;
  return static_cast<double>(1 + exceed) /
         static_cast<double>(n_bootstrap + 1);
}

double forecast_pvalue(const ForecastEnsemble& prior_forecast,
                       long realized_accrual, int at_day) {
  auto it = std::find(prior_forecast.horizon_days.begin(),
                      prior_forecast.horizon_days.end(), at_day);
  if (it == prior_forecast.horizon_days.end())
    throw ValidationError("forecast_pvalue: day " + std::to_string(at_day) +
                          " is outside the forecast horizon");
  size_t d = static_cast<size_t>(it - prior_forecast.horizon_days.begin());

  long below = 0, above = 0;
  for (const auto& path : prior_forecast.paths) {
    if (path[d] <= realized_accrual) ++below;
    if (path[d] >= realized_accrual) ++above;
  }
  double n = static_cast<double>(prior_forecast.paths.size());
  double p = 2.0 * std::min(static_cast<double>(below) / n,
                            static_cast<double>(above) / n);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace accrue
