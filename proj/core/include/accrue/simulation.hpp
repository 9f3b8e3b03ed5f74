#ifndef ACCRUE_SIMULATION_HPP_
#define ACCRUE_SIMULATION_HPP_

#include <cstdint>
#include <variant>
#include <vector>

#include "accrue/curve_shapes.hpp"
#include "accrue/trial_data.hpp"

namespace accrue {

enum class ScheduleKind { kUniform, kClumped, kExplicit, kTypical };

struct Schedule {
  ScheduleKind kind = ScheduleKind::kUniform;
  int period_days = 60;            // clumped: cluster spacing
  std::vector<int> explicit_days;  // explicit: one day per centre
};

enum class RandomEffectKind { kGamma, kMixture };

struct RandomEffect {
  RandomEffectKind kind = RandomEffectKind::kGamma;
  // mixture: lambda ~ w Gamma(alpha, alpha/phi1) + (1-w) Gamma(alpha, alpha/phi2)
  double phi1 = 0.0;
  double phi2 = 0.0;
  double weight = 0.5;
};

struct SimConfig {
  int n_centres = 1;
  int trial_days = 1;
  double alpha = 1.0;
  double phi = 1.0;
  std::variant<CurveShape, WeibullShape> shape =
      CurveShape::homogeneous(1.0);
  Schedule schedule;
  RandomEffect random_effect;
  bool deterministic_first_recruitment = false;
  long target = 0;
  std::uint64_t seed = 0;
};

// Ground-truth trial: per centre, an initiation day from the schedule, a
// random effect, then daily Poisson counts on the centre's local clock.
// The returned snapshot has census_day = trial_days (the full horizon).
TrialSnapshot simulate_trial(const SimConfig& config);

struct DelayModel {
  double weibull_scale = 0.0;
  double weibull_shape = 0.0;
  std::vector<int> planned_days;
};

// Parameters matching delay percentiles p5 = 10 and p95 = 322 days
// (implied median ~92 days).
DelayModel default_delay_model();

// actual initiation time per centre: planned day + Weibull delay
std::vector<double> simulate_delays(const DelayModel& dm,
                                    std::uint64_t seed);

struct DelayFit {
  double scale = 0.0;
  double shape = 0.0;
  bool boundary_warning = false;  // shape ran to the optimiser bound
};

struct DelayObservation {
  double delay_days = 0.0;
  bool censored = false;  // still pending at the census
};

// Censored Weibull MLE; day-resolution uncensored delays are treated as
// the interval midpoint d + 0.5.
DelayFit fit_delays_censored(const std::vector<DelayObservation>& observed);

}  // namespace accrue

#endif  // ACCRUE_SIMULATION_HPP_
