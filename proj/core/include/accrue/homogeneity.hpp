#ifndef ACCRUE_HOMOGENEITY_HPP_
#define ACCRUE_HOMOGENEITY_HPP_

#include <cstdint>
#include <vector>

#include "accrue/trial_data.hpp"

namespace accrue {

enum class TestMethod { kLRT, kBST };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::kLRT;
  int n_bootstrap = 0;
};

// One-sided Poisson likelihood-ratio test of mu1 = mu2 against mu1 > mu2.
// The statistic is clamped to zero when x1 <= x2; under the null it is a
// 50/50 mixture of a point mass at zero and chi^2_1.
TestResult lrt(const CountSplit& split);

// Nonparametric bootstrap test: resample daily counts with replacement
// within each centre, compare the observed first-half-minus-second-half
// difference to the resampled distribution.  Reports the upper-tail
// p-value (1/B) sum 1{Delta_b >= Delta}.
TestResult bootstrap_test(const std::vector<RecruitmentSeries>& series,
                          int n_bootstrap, std::uint64_t seed);

struct PowerStudyConfig {
  double level = 0.05;
  int n_bootstrap = 1000;
  // BST harness layout: one centre recruiting over bst_days days, the first
  // half at constant daily rate, the second half scaled by R
  int bst_days = 28;
  // fraction of resample ties with the observed statistic counted towards
  // rejection; corrects the discreteness bias of the rejection rate
  double bst_tie_weight = 0.6;
};

// Monte Carlo power at the given level: X1 ~ Pois(mu1), X2 ~ Pois(R mu1)
// for the LRT; per-day Poisson counts with a rate drop of R halfway for
// the BST.  Returns the rejection rate.
double power_study(double expectation_x1, double ratio_r, TestMethod method,
                   long replications, std::uint64_t seed,
                   const PowerStudyConfig& config = {});

}  // namespace accrue

#endif  // ACCRUE_HOMOGENEITY_HPP_
