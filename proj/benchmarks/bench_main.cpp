// Microbenchmarks for the hot paths: likelihood evaluation and derivatives,
// curve-shape integrals, the importance-sampling fit, posterior-predictive
// forecasting, and the resampling homogeneity test.  Data sizes mirror a
// mid-size multicentre trial (around a hundred centres, a year of daily
// counts).

#include <benchmark/benchmark.h>

#include "accrue/curve_shapes.hpp"
#include "accrue/homogeneity.hpp"
#include "accrue/inference.hpp"
#include "accrue/likelihood.hpp"
#include "accrue/prediction.hpp"
#include "accrue/simulation.hpp"
#include "accrue/trial_data.hpp"

namespace {

using namespace accrue;

TrialSnapshot make_snapshot(int n_centres, int days, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n_centres = n_centres;
  cfg.trial_days = days;
  cfg.alpha = 1.4;
  cfg.phi = 0.05;
  cfg.shape = CurveShape(2.0, 0.02, days / 2.0);
  cfg.schedule.kind = ScheduleKind::kUniform;
  cfg.seed = seed;
  return simulate_trial(cfg);
}

void BM_CurveShapeIntegral(benchmark::State& state) {
  CurveShape shape(2.0, 0.02, 180.0);
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(shape.G(t));
    t = t < 360.0 ? t + 1.0 : 1.0;
  }
}
BENCHMARK(BM_CurveShapeIntegral);

void BM_LogLikelihood(benchmark::State& state) {
  TrialSnapshot snap = make_snapshot(static_cast<int>(state.range(0)), 360, 3);
  LikelihoodModel lik(snap, 2.0);
  ModelParams p;
  p.alpha = 1.2;
  p.phi = 0.05;
  p.theta = 0.02;
  p.kappa = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(lik.log_likelihood(p));
}
BENCHMARK(BM_LogLikelihood)->Arg(20)->Arg(100)->Arg(500);

void BM_ScoreAndInformation(benchmark::State& state) {
  TrialSnapshot snap = make_snapshot(100, 360, 3);
  LikelihoodModel lik(snap, 2.0);
  ModelParams p;
  p.alpha = 1.2;
  p.phi = 0.05;
  p.theta = 0.02;
  p.kappa = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lik.score(p));
    benchmark::DoNotOptimize(lik.observed_information(p));
  }
}
BENCHMARK(BM_ScoreAndInformation);

void BM_ImportanceSamplingFit(benchmark::State& state) {
  TrialSnapshot snap = make_snapshot(100, 360, 3);
  PriorConfig prior;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        importance_sample(snap, 2.0, prior, static_cast<int>(state.range(0)),
                          7));
}
BENCHMARK(BM_ImportanceSamplingFit)->Arg(1000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);

void BM_ForecastPaths(benchmark::State& state) {
  TrialSnapshot full = make_snapshot(100, 360, 3);
  TrialSnapshot interim = truncate_snapshot(full, 240);
  PriorConfig prior;
  ModelEnsemble ens = fit_all_models(interim, prior, 2000, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sample_accrual_paths(ens, interim, 360,
                             static_cast<int>(state.range(0)), 9));
}
BENCHMARK(BM_ForecastPaths)->Arg(500)->Arg(2000)
    ->Unit(benchmark::kMillisecond);

void BM_BootstrapHomogeneityTest(benchmark::State& state) {
  TrialSnapshot snap = make_snapshot(100, 360, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(bootstrap_test(snap.centres, 1000, 5));
}
BENCHMARK(BM_BootstrapHomogeneityTest)->Unit(benchmark::kMillisecond);

void BM_PowerStudyCell(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        power_study(50.0, 0.7, TestMethod::kLRT, 10000, 11));
}
BENCHMARK(BM_PowerStudyCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
