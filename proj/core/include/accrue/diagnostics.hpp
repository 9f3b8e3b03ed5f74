#ifndef ACCRUE_DIAGNOSTICS_HPP_
#define ACCRUE_DIAGNOSTICS_HPP_

#include <vector>

#include "accrue/inference.hpp"
#include "accrue/prediction.hpp"
#include "accrue/trial_data.hpp"

namespace accrue {

enum class QQKind { kRandomEffect, kInitialPeriod };

struct QQTable {
  QQKind kind = QQKind::kRandomEffect;
  std::vector<double> theoretical;  // strictly increasing quantiles
  std::vector<double> empirical;    // sorted observed values

  // least-squares slope of empirical on theoretical (through the origin of
  // the centred cloud); unit slope indicates a well-calibrated model
  double slope() const;
};

// Sorted per-centre posterior-mean random effects against quantiles of the
// fitted hierarchical Gamma(alpha, alpha/phi), at plotting positions
// (i - 0.5) / C.  Parameters are the fit's importance-weighted posterior
// means.
QQTable random_effect_qq(const ModelFit& fit, const TrialSnapshot& snapshot);

// Sorted first-t_prime recruitment totals of centres open at least t_prime
// days against quantiles of the implied negative binomial with shape alpha
// and mean phi * G(t_prime).
QQTable initial_period_qq(const ModelFit& fit, const TrialSnapshot& snapshot,
                          int t_prime = 60);

// Parametric-bootstrap goodness-of-fit p-value for the hierarchical gamma
// random-effect distribution underlying the QQ diagnostic.  The statistic
// is the Cramer-von Mises distance between the fitted-gamma probability
// transforms of the per-centre posterior-mean random effects and the
// uniform plotting positions.  Both the observed data and every bootstrap
// replicate are re-fitted by maximum likelihood, so the p-value accounts
// for the parameters adapting to the data; without the refit the test is
// badly conservative.  Small p-values indicate the gamma assumption does
// not describe the between-centre heterogeneity (for example a multimodal
// mixture of recruitment rates).
double random_effect_gof_pvalue(const TrialSnapshot& snapshot, double kappa,
                                int n_bootstrap, std::uint64_t seed);

// Two-sided empirical tail probability of the realised accrual within the
// forecast path distribution at a given day, clipped to [0, 1].
double forecast_pvalue(const ForecastEnsemble& prior_forecast,
                       long realized_accrual, int at_day);

}  // namespace accrue

#endif  // ACCRUE_DIAGNOSTICS_HPP_
