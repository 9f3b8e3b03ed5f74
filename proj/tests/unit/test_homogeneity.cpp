#include <cmath>
#include <vector>

#include "accrue/errors.hpp"
#include "accrue/homogeneity.hpp"
#include "doctest.h"

using namespace accrue;

TEST_CASE("likelihood-ratio statistic and p-value at a worked point") {
  CountSplit split;
  split.x1 = 10;
  split.x2 = 5;
  TestResult res = lrt(split);
  // 2 (10 ln(10/7.5) + 5 ln(5/7.5)); tail = 0.5 P(chi2_1 >= T)
  CHECK(res.statistic == doctest::Approx(1.6989903679539747).epsilon(1e-12));
  CHECK(res.p_value == doctest::Approx(0.09621003395235639).epsilon(1e-10));
  CHECK(res.method == TestMethod::kLRT);
}

TEST_CASE("likelihood-ratio test is one-sided") {
  CountSplit split;
  split.x1 = 5;
  split.x2 = 10;
  TestResult res = lrt(split);
  CHECK(res.statistic == 0.0);
  CHECK(res.p_value == 1.0);

  split.x1 = 7;
  split.x2 = 7;
  res = lrt(split);
  CHECK(res.statistic == 0.0);
  CHECK(res.p_value == 1.0);

  split.x1 = 0;
  split.x2 = 0;
  CHECK_THROWS_AS(lrt(split), InsufficientDataError);
}

TEST_CASE("lrt statistic increases in x1 for fixed total") {
  double last = -1.0;
  for (long x1 = 6; x1 <= 10; ++x1) {
    CountSplit split;
    split.x1 = x1;
    split.x2 = 10 - x1;
    double t = lrt(split).statistic;
    CHECK(t > last);
    last = t;
  }
}

TEST_CASE("bootstrap p-value enumeration on a two-day centre") {
  // pool {3, 0}: resampled delta is 3 w.p. 1/4, 0 w.p. 1/2, -3 w.p. 1/4;
  // observed delta 3, so P(delta_b >= 3) = 1/4
  RecruitmentSeries c;
  c.counts = {3, 0};
  TestResult res = bootstrap_test({c}, 100000, 17);
  CHECK(res.method == TestMethod::kBST);
  CHECK(res.n_bootstrap == 100000);
  CHECK(res.statistic == 3.0);
  CHECK(res.p_value == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("bootstrap test degenerate and error cases") {
  RecruitmentSeries zeros;
  zeros.counts = {0, 0, 0, 0};
  TestResult res = bootstrap_test({zeros}, 200, 1);
  CHECK(res.p_value == 1.0);

  RecruitmentSeries one_day;
  one_day.counts = {5};
  CHECK_THROWS_AS(bootstrap_test({one_day}, 200, 1), InsufficientDataError);
  CHECK_THROWS_AS(bootstrap_test({}, 200, 1), InsufficientDataError);
  CHECK_THROWS_AS(bootstrap_test({zeros}, 0, 1), std::invalid_argument);
}

TEST_CASE("bootstrap p-value is reproducible for a fixed seed") {
  RecruitmentSeries a, b;
  a.counts = {2, 0, 1, 0, 0, 0};
  b.counts = {1, 1, 0, 0, 1, 0, 0};
  TestResult r1 = bootstrap_test({a, b}, 1000, 99);
  TestResult r2 = bootstrap_test({a, b}, 1000, 99);
  CHECK(r1.p_value == r2.p_value);
  CHECK(r1.statistic == r2.statistic);
  TestResult r3 = bootstrap_test({a, b}, 1000, 100);
  CHECK(r3.statistic == r1.statistic);  // data-only
}

TEST_CASE("power study reproduces reference points") {
  // published power 0.75 at E[X1]=100, R=0.7 for the likelihood-ratio test
  double p = power_study(100.0, 0.7, TestMethod::kLRT, 20000, 3);
  CHECK(p == doctest::Approx(0.75).epsilon(0.015));
  // type-I error near the nominal 5% level under the null
  double a = power_study(50.0, 1.0, TestMethod::kLRT, 20000, 3);
  CHECK(std::fabs(a - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / 20000.0));
}

TEST_CASE("power study is monotone in the rate-drop ratio") {
  double p9 = power_study(50.0, 0.9, TestMethod::kLRT, 10000, 5);
  double p6 = power_study(50.0, 0.6, TestMethod::kLRT, 10000, 5);
  CHECK(p6 > p9);
}

TEST_CASE("bootstrap power study runs and respects the null") {
  PowerStudyConfig cfg;
  cfg.n_bootstrap = 200;
  double a = power_study(20.0, 1.0, TestMethod::kBST, 2000, 7, cfg);
  CHECK(a < 0.09);
  double p = power_study(20.0, 0.5, TestMethod::kBST, 2000, 7, cfg);
  CHECK(p > 0.4);
}

TEST_CASE("power study rejects invalid arguments") {
  CHECK_THROWS_AS(power_study(0.0, 0.5, TestMethod::kLRT, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(power_study(10.0, 1.5, TestMethod::kLRT, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(power_study(10.0, 0.5, TestMethod::kLRT, 0, 1),
                  std::invalid_argument);
}
