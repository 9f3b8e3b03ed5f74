#ifndef ACCRUE_PREDICTION_HPP_
#define ACCRUE_PREDICTION_HPP_

#include <cstdint>
#include <vector>

#include "accrue/inference.hpp"
#include "accrue/likelihood.hpp"
#include "accrue/trial_data.hpp"

namespace accrue {

// Conjugate posterior of a centre's random effect:
// lambda | data ~ Gamma(alpha_star, alpha_star / phi_star)
struct CentrePosterior {
  double alpha_star = 0.0;
  double phi_star = 0.0;

  double rate() const { return alpha_star / phi_star; }
  double mean() const { return phi_star; }
};

CentrePosterior centre_posterior(const ModelParams& params,
                                 const RecruitmentSeries& series,
                                 double tau_bar);

// Negative binomial predictive P(N = n) for a future interval with
// integrated shape g_plus (Poisson mean lambda * g_plus marginalised over
// the gamma posterior).
double predictive_count_pmf(const CentrePosterior& cp, double g_plus,
                            long n);

struct QuantileBand {
  int day = 0;
  double q_low = 0.0;
  double mean = 0.0;
  double q_high = 0.0;
};

struct ForecastEnsemble {
  int census_day = 0;
  long base_accrual = 0;
  std::vector<int> horizon_days;        // census_day + 1 .. horizon
  std::vector<std::vector<long>> paths;  // draw x day, cumulative accrual

  std::vector<QuantileBand> bands(double low = 0.025,
                                  double high = 0.975) const;
};

// Model-averaged posterior-predictive accrual paths: per draw, sample a
// model, a parameter triple from its weighted posterior sample, per-centre
// random effects, then daily Poisson increments on each centre's local
// clock.
ForecastEnsemble sample_accrual_paths(const ModelEnsemble& ensemble,
                                      const TrialSnapshot& snapshot,
                                      int horizon, int draws,
                                      std::uint64_t seed);

// per-day empirical quantiles of the sampled paths, one row per day
std::vector<std::vector<double>> forecast_quantiles(
    const ForecastEnsemble& fe, const std::vector<double>& probs);

struct CompletionTimes {
  std::vector<double> times;  // global day of the m-th future recruit;
                              // +inf when the intensity saturates short
  long infinite_draws = 0;
};

// Time to recruit m further patients after the census, sampled exactly by
// inverting the trial's integrated intensity against Gamma(m, 1) draws.
CompletionTimes time_to_completion(const ModelEnsemble& ensemble,
                                   const TrialSnapshot& snapshot, long m,
                                   int draws, std::uint64_t seed);

}  // namespace accrue

#endif  // ACCRUE_PREDICTION_HPP_
