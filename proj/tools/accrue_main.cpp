// accrue: interim recruitment modelling CLI.
//
// Exit codes: 0 success, 2 validation/parse error, 3 fit failure,
// 64 usage error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "accrue/diagnostics.hpp"
#include "accrue/errors.hpp"
#include "accrue/homogeneity.hpp"
#include "accrue/inference.hpp"
#include "accrue/prediction.hpp"
#include "accrue/priors.hpp"
#include "accrue/simulation.hpp"
#include "accrue/trial_data.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string join_invocation(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

struct RunContext {
  std::string invocation;
  std::string config_extra;  // e.g. priors/config file contents

  std::string config_hash() const {
    return fnv1a_hex(std::string(kVersion) + '\n' + invocation + '\n' +
                     config_extra);
  }
  void write_csv_header(std::ostream& os) const {
    os << "# accrue " << kVersion << "\n# invocation: " << invocation
       << "\n# config_hash: " << config_hash() << '\n';
  }
  void stamp_json(json& j) const {
    j["version"] = kVersion;
    j["invocation"] = invocation;
    j["config_hash"] = config_hash();
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw accrue::ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string kappa_key(double kappa) {
  if (std::isinf(kappa)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", kappa);
  return buf;
}

double kappa_from_key(const std::string& key) {
  if (key == "inf") return accrue::kKappaInf;
  return std::stod(key);
}

json snapshot_to_json(const accrue::TrialSnapshot& snap) {
  json j;
  j["census_day"] = snap.census_day;
  j["target"] = snap.target;
  j["planned_initiations"] = snap.planned_initiations;
  j["deterministic_first_recruitment"] =
      snap.deterministic_first_recruitment;
  j["centres"] = json::array();
  for (const auto& c : snap.centres)
    j["centres"].push_back({{"id", c.centre_id},
                            {"initiation_day", c.initiation_day},
                            {"counts", c.counts}});
  return j;
}

accrue::TrialSnapshot snapshot_from_json(const json& j) {
  accrue::TrialSnapshot snap;
  snap.census_day = j.at("census_day").get<int>();
  snap.target = j.value("target", 0L);
  if (j.contains("planned_initiations"))
    snap.planned_initiations =
        j["planned_initiations"].get<std::vector<int>>();
  snap.deterministic_first_recruitment =
      j.value("deterministic_first_recruitment", false);
  for (const auto& c : j.at("centres")) {
    accrue::RecruitmentSeries s;
    s.centre_id = c.at("id").get<std::string>();
    s.initiation_day = c.at("initiation_day").get<int>();
    s.counts = c.at("counts").get<std::vector<long>>();
    snap.centres.push_back(std::move(s));
  }
  snap.validate();
  return snap;
}

struct LoadedFit {
  accrue::ModelEnsemble ensemble;
  accrue::TrialSnapshot snapshot;
};

LoadedFit load_fit(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw accrue::ParseError("invalid fit JSON: " + std::string(e.what()));
  }
  LoadedFit out;
  out.snapshot = snapshot_from_json(j.at("snapshot"));
  out.ensemble.tau_bar = j.at("tau_bar").get<double>();
  if (j.contains("warnings"))
    out.ensemble.warnings = j["warnings"].get<std::vector<std::string>>();
  for (const auto& m : j.at("models")) {
    accrue::ModelFit fit;
    fit.kappa = kappa_from_key(m.at("kappa").get<std::string>());
    fit.tau_bar = out.ensemble.tau_bar;
    fit.log_marginal = m.at("log_marginal").get<double>();
    fit.ess = m.at("ess").get<double>();
    fit.low_ess = m.value("low_ess", false);
    fit.mode.kappa = fit.kappa;
    fit.mode.alpha = m.at("mode").at("alpha").get<double>();
    fit.mode.phi = m.at("mode").at("phi").get<double>();
    fit.mode.theta = m.at("mode").value("theta", 0.0);
    fit.mode_log = fit.mode.to_log();
    const int dim = fit.mode.dim();
    for (const auto& row : m.at("samples")) {
      Eigen::VectorXd x(dim);
      x[0] = std::log(row.at(0).get<double>());
      x[1] = std::log(row.at(1).get<double>());
      if (dim == 3) x[2] = std::log(row.at(2).get<double>());
      fit.samples_log.push_back(std::move(x));
    }
    fit.log_weights.assign(fit.samples_log.size(), 0.0);  // resampled
    out.ensemble.posterior_model_probs.push_back(
        m.at("posterior_prob").get<double>());
    out.ensemble.fits.push_back(std::move(fit));
  }
  if (out.ensemble.fits.empty())
    throw accrue::ValidationError("fit file contains no models");
  return out;
}

// ---------------------------------------------------------------- ingest

accrue::TrialSnapshot load_snapshot(const std::string& csv,
                                    const std::string& meta, int census) {
  accrue::TrialSnapshot snap = accrue::ingest_csv(csv, meta);
  if (census > 0) snap = accrue::truncate_snapshot(snap, census);
  return snap;
}

struct IngestArgs {
  std::string csv, meta, out_csv, out_meta;
  int census = 0;
};

int run_ingest(const IngestArgs& a, const RunContext& ctx) {
  accrue::TrialSnapshot snap = load_snapshot(a.csv, a.meta, a.census);
  if (!a.out_csv.empty()) accrue::export_csv(snap, a.out_csv, a.out_meta);
  json j;
  ctx.stamp_json(j);
  j["centres"] = snap.centres.size();
  j["census_day"] = snap.census_day;
  j["total_recruits"] = snap.total_recruits();
  j["mean_open_duration"] = snap.mean_open_duration();
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------------ test

struct TestArgs {
  std::string csv, meta, method = "lrt", out;
  double level = 0.05;
  int bootstrap = 1000;
  int census = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;
};

int run_test(const TestArgs& a, const RunContext& ctx) {
  accrue::TrialSnapshot snap = load_snapshot(a.csv, a.meta, a.census);
  accrue::TestResult result;
  if (a.method == "lrt") {
    result = accrue::lrt(accrue::split_counts(snap.centres));
  } else if (a.method == "bst") {
    if (!a.have_seed)
      throw accrue::ValidationError("--seed is required for method bst");
    result = accrue::bootstrap_test(snap.centres, a.bootstrap, a.seed);
  } else {
    throw accrue::ValidationError("unknown test method '" + a.method + "'");
  }
  json j;
  ctx.stamp_json(j);
  j["method"] = a.method;
  j["statistic"] = result.statistic;
  j["p_value"] = result.p_value;
  j["reject_at_level"] = result.p_value < a.level;
  j["level"] = a.level;
  if (result.method == accrue::TestMethod::kBST)
    j["n_bootstrap"] = result.n_bootstrap;
  std::string text = j.dump(2) + '\n';
  if (a.out.empty())
    std::cout << text;
  else
    write_file(a.out, text);
  return 0;
}

// ------------------------------------------------------------------- fit

struct FitArgs {
  std::string snapshot, meta, priors, out;
  int samples = 10000;
  int store_samples = 2000;
  int census = 0;
  std::uint64_t seed = 0;
};

int run_fit(const FitArgs& a, RunContext& ctx) {
  accrue::PriorConfig prior;
  if (!a.priors.empty()) {
    ctx.config_extra = read_file(a.priors);
    prior = accrue::PriorConfig::from_json_file(a.priors);
  }
  accrue::TrialSnapshot snap = load_snapshot(a.snapshot, a.meta, a.census);
  accrue::ModelEnsemble ensemble =
      accrue::fit_all_models(snap, prior, a.samples, a.seed);

  json j;
  ctx.stamp_json(j);
  j["tau_bar"] = ensemble.tau_bar;
  j["warnings"] = ensemble.warnings;
  j["snapshot"] = snapshot_to_json(snap);
  j["models"] = json::array();
  for (size_t k = 0; k < ensemble.fits.size(); ++k) {
    const auto& fit = ensemble.fits[k];
    json m;
    m["kappa"] = kappa_key(fit.kappa);
    m["posterior_prob"] = ensemble.posterior_model_probs[k];
    m["log_marginal"] = fit.log_marginal;
    m["ess"] = fit.ess;
    m["low_ess"] = fit.low_ess;
    m["mode"] = {{"alpha", fit.mode.alpha}, {"phi", fit.mode.phi}};
    if (fit.mode.has_theta()) m["mode"]["theta"] = fit.mode.theta;
    auto params = accrue::resample(
        fit, a.store_samples,
        a.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1)));
    json rows = json::array();
    for (const auto& p : params) {
      if (p.has_theta())
        rows.push_back({p.alpha, p.phi, p.theta});
      else
        rows.push_back({p.alpha, p.phi});
    }
    m["samples"] = std::move(rows);
    j["models"].push_back(std::move(m));
  }
  write_file(a.out, j.dump(2) + '\n');
  for (const auto& w : ensemble.warnings)
    std::cerr << "warning: " << w << '\n';
  return 0;
}

// -------------------------------------------------------------- forecast

struct ForecastArgs {
  std::string fit, out;
  int horizon = 0;
  int draws = 2000;
  int aggregate = 1;
  std::uint64_t seed = 0;
};

int run_forecast(const ForecastArgs& a, const RunContext& ctx) {
  LoadedFit lf = load_fit(a.fit);
  if (a.horizon <= lf.snapshot.census_day)
    throw accrue::ValidationError("--horizon must be after the census day");
  if (a.aggregate < 1)
    throw accrue::ValidationError("--aggregate must be >= 1");
  accrue::ForecastEnsemble fe = accrue::sample_accrual_paths(
      lf.ensemble, lf.snapshot, a.horizon, a.draws, a.seed);

  // aggregation keeps every k-th day (and always the final one); it is a
  // pure selection of columns of the daily paths
  std::vector<size_t> keep;
  for (size_t d = 0; d < fe.horizon_days.size(); ++d) {
    int offset = fe.horizon_days[d] - fe.census_day;
    if (offset % a.aggregate == 0 || d + 1 == fe.horizon_days.size())
      keep.push_back(d);
  }
  accrue::ForecastEnsemble reduced;
  reduced.census_day = fe.census_day;
  reduced.base_accrual = fe.base_accrual;
  for (size_t d : keep) reduced.horizon_days.push_back(fe.horizon_days[d]);
  reduced.paths.resize(fe.paths.size());
  for (size_t b = 0; b < fe.paths.size(); ++b)
    for (size_t d : keep) reduced.paths[b].push_back(fe.paths[b][d]);

  std::ostringstream os;
  ctx.write_csv_header(os);
  os << "day,q025,mean,q975\n";
  for (const auto& band : reduced.bands()) {
    char line[128];
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", band.day,
                  band.q_low, band.mean, band.q_high);
    os << line;
  }
  write_file(a.out, os.str());
  return 0;
}

// ------------------------------------------------------------------- ttc

struct TtcArgs {
  std::string fit, out;
  long target = 0;
  bool total = false;
  int draws = 10000;
  std::uint64_t seed = 0;
};

int run_ttc(const TtcArgs& a, const RunContext& ctx) {
  LoadedFit lf = load_fit(a.fit);
  long m = a.target;
  if (m == 0) {
    m = lf.snapshot.target - lf.snapshot.total_recruits();
  } else if (a.total) {
    m = a.target - lf.snapshot.total_recruits();
  }
  if (m < 1)
    throw accrue::ValidationError(
        "completion target already reached or not positive");
  accrue::CompletionTimes ct =
      accrue::time_to_completion(lf.ensemble, lf.snapshot, m, a.draws,
                                 a.seed);

  std::ostringstream os;
  ctx.write_csv_header(os);
  os << "# remaining_target: " << m << '\n';
  os << "# infinite_draws: " << ct.infinite_draws << '\n';
  os << "completion_day\n";
  for (double t : ct.times) {
    if (std::isfinite(t)) {
      char line[64];
      std::snprintf(line, sizeof(line), "%.6f\n", t);
      os << line;
    } else {
      os << "inf\n";
    }
  }
  write_file(a.out, os.str());
  return 0;
}

// -------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string fit, out_re, out_init;
  int t_prime = 60;
};

void write_qq(const accrue::QQTable& table, const std::string& path,
              const char* kind, const RunContext& ctx) {
  std::ostringstream os;
  ctx.write_csv_header(os);
  os << "# kind: " << kind << '\n';
  char line[128];
  std::snprintf(line, sizeof(line), "# slope: %.6f\n", table.slope());
  os << line;
  os << "theoretical_quantile,empirical_value\n";
  for (size_t i = 0; i < table.theoretical.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.8g,%.8g\n", table.theoretical[i],
                  table.empirical[i]);
    os << line;
  }
  write_file(path, os.str());
}

int run_diagnose(const DiagnoseArgs& a, const RunContext& ctx) {
  LoadedFit lf = load_fit(a.fit);
  const accrue::ModelFit& fit = lf.ensemble.modal_fit();
  if (!a.out_re.empty())
    write_qq(accrue::random_effect_qq(fit, lf.snapshot), a.out_re,
             "random_effect", ctx);
  if (!a.out_init.empty())
    write_qq(accrue::initial_period_qq(fit, lf.snapshot, a.t_prime),
             a.out_init, "initial_period", ctx);
  return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, out_csv, out_meta;
  std::uint64_t seed = 0;
};

accrue::SimConfig sim_config_from_json(const json& j, std::uint64_t seed) {
  accrue::SimConfig cfg;
  cfg.n_centres = j.at("n_centres").get<int>();
  cfg.trial_days = j.at("trial_days").get<int>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.phi = j.at("phi").get<double>();
  cfg.target = j.value("target", 0L);
  cfg.deterministic_first_recruitment =
      j.value("deterministic_first_recruitment", false);
  cfg.seed = seed;

  const json& s = j.at("shape");
  double tau_bar = s.value("tau_bar", static_cast<double>(cfg.trial_days));
  std::string kind = s.value("kind", "curve");
  if (kind == "curve") {
    double kappa = kappa_from_key(s.at("kappa").is_string()
                                      ? s["kappa"].get<std::string>()
                                      : std::to_string(
                                            s["kappa"].get<double>()));
    if (kappa == 0.0)
      cfg.shape = accrue::CurveShape::homogeneous(tau_bar);
    else
      cfg.shape =
          accrue::CurveShape(kappa, s.at("theta").get<double>(), tau_bar);
  } else if (kind == "weibull") {
    cfg.shape = accrue::WeibullShape(s.at("scale").get<double>(),
                                     s.at("k").get<double>(), tau_bar);
  } else {
    throw accrue::ValidationError("unknown shape kind '" + kind + "'");
  }

  if (j.contains("schedule")) {
    const json& sc = j["schedule"];
    std::string sk = sc.value("kind", "uniform");
    if (sk == "uniform")
      cfg.schedule.kind = accrue::ScheduleKind::kUniform;
    else if (sk == "clumped")
      cfg.schedule.kind = accrue::ScheduleKind::kClumped;
    else if (sk == "explicit")
      cfg.schedule.kind = accrue::ScheduleKind::kExplicit;
    else if (sk == "typical")
      cfg.schedule.kind = accrue::ScheduleKind::kTypical;
    else
      throw accrue::ValidationError("unknown schedule kind '" + sk + "'");
    cfg.schedule.period_days = sc.value("period_days", 60);
    if (sc.contains("days"))
      cfg.schedule.explicit_days = sc["days"].get<std::vector<int>>();
  }

  if (j.contains("random_effect")) {
    const json& re = j["random_effect"];
    std::string rk = re.value("kind", "gamma");
    if (rk == "gamma") {
      cfg.random_effect.kind = accrue::RandomEffectKind::kGamma;
    } else if (rk == "mixture") {
      cfg.random_effect.kind = accrue::RandomEffectKind::kMixture;
      cfg.random_effect.phi1 = re.at("phi1").get<double>();
      cfg.random_effect.phi2 = re.at("phi2").get<double>();
      cfg.random_effect.weight = re.value("weight", 0.5);
    } else {
      throw accrue::ValidationError("unknown random_effect kind '" + rk +
                                    "'");
    }
  }
  return cfg;
}

int run_simulate(const SimulateArgs& a, RunContext& ctx) {
  ctx.config_extra = read_file(a.config);
  json j;
  try {
    j = json::parse(ctx.config_extra);
  } catch (const json::exception& e) {
    throw accrue::ParseError("invalid simulation config: " +
                             std::string(e.what()));
  }
  accrue::SimConfig cfg = sim_config_from_json(j, a.seed);
  accrue::TrialSnapshot snap = accrue::simulate_trial(cfg);
  accrue::export_csv(snap, a.out_csv, a.out_meta);
  json summary;
  ctx.stamp_json(summary);
  summary["centres"] = snap.centres.size();
  summary["total_recruits"] = snap.total_recruits();
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ----------------------------------------------------------------- power

struct PowerArgs {
  std::string method = "lrt", out;
  std::vector<double> expectations;
  std::vector<double> ratios;
  long replications = 10000;
  int bootstrap = 1000;
  double level = 0.05;
  std::uint64_t seed = 0;
};

int run_power(const PowerArgs& a, const RunContext& ctx) {
  accrue::TestMethod method;
  if (a.method == "lrt")
    method = accrue::TestMethod::kLRT;
  else if (a.method == "bst")
    method = accrue::TestMethod::kBST;
  else
    throw accrue::ValidationError("unknown test method '" + a.method + "'");

  accrue::PowerStudyConfig cfg;
  cfg.level = a.level;
  cfg.n_bootstrap = a.bootstrap;

  std::ostringstream os;
  ctx.write_csv_header(os);
  os << "method,expectation_x1,ratio,power\n";
  std::uint64_t cell = 0;
  for (double e : a.expectations) {
    for (double r : a.ratios) {
      double power = accrue::power_study(
          e, r, method, a.replications,
          a.seed ^ (0x9E3779B97F4A7C15ULL * ++cell), cfg);
      char line[128];
      std::snprintf(line, sizeof(line), "%s,%g,%g,%.4f\n", a.method.c_str(),
                    e, r, power);
      os << line;
    }
  }
  if (a.out.empty())
    std::cout << os.str();
  else
    write_file(a.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interim recruitment modelling and prediction"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker-thread cap (ACCRUE_THREADS)")
      ->envname("ACCRUE_THREADS");

  RunContext ctx;
  ctx.invocation = join_invocation(argc, argv);

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "validate a snapshot");
  cmd_ingest->add_option("--csv", ingest.csv)->required();
  cmd_ingest->add_option("--meta", ingest.meta)->required();
  cmd_ingest->add_option("--out-csv", ingest.out_csv);
  cmd_ingest->add_option("--out-meta", ingest.out_meta)
      ->needs(cmd_ingest->get_option("--out-csv"));
  cmd_ingest->add_option("--census", ingest.census,
                         "freeze an earlier census day");

  TestArgs test;
  auto* cmd_test = app.add_subcommand("test", "decay-detection test");
  cmd_test->add_option("--csv", test.csv)->required();
  cmd_test->add_option("--meta", test.meta)->required();
  cmd_test->add_option("--method", test.method)
      ->check(CLI::IsMember({"lrt", "bst"}));
  cmd_test->add_option("--level", test.level);
  cmd_test->add_option("--bootstrap", test.bootstrap);
  cmd_test->add_option("--census", test.census,
                       "freeze an earlier census day");
  auto* test_seed = cmd_test->add_option("--seed", test.seed);
  cmd_test->add_option("--out", test.out);

  FitArgs fit;
  auto* cmd_fit = app.add_subcommand("fit", "Bayesian model-ensemble fit");
  cmd_fit->add_option("--snapshot", fit.snapshot)->required();
  cmd_fit->add_option("--meta", fit.meta)->required();
  cmd_fit->add_option("--priors", fit.priors);
  cmd_fit->add_option("--samples", fit.samples);
  cmd_fit->add_option("--store-samples", fit.store_samples);
  cmd_fit->add_option("--census", fit.census,
                      "freeze an earlier census day");
  auto* fit_seed = cmd_fit->add_option("--seed", fit.seed);
  cmd_fit->add_option("--out", fit.out)->required();

  ForecastArgs forecast;
  auto* cmd_forecast =
      app.add_subcommand("forecast", "posterior-predictive accrual bands");
  cmd_forecast->add_option("--fit", forecast.fit)->required();
  cmd_forecast->add_option("--horizon", forecast.horizon)->required();
  cmd_forecast->add_option("--draws", forecast.draws);
  cmd_forecast->add_option("--aggregate", forecast.aggregate);
  auto* forecast_seed = cmd_forecast->add_option("--seed", forecast.seed);
  cmd_forecast->add_option("--out", forecast.out)->required();

  TtcArgs ttc;
  auto* cmd_ttc = app.add_subcommand("ttc", "time-to-completion sampling");
  cmd_ttc->add_option("--fit", ttc.fit)->required();
  cmd_ttc->add_option("--target", ttc.target);
  cmd_ttc->add_flag("--total", ttc.total,
                    "interpret --target as the trial total");
  cmd_ttc->add_option("--draws", ttc.draws);
  auto* ttc_seed = cmd_ttc->add_option("--seed", ttc.seed);
  cmd_ttc->add_option("--out", ttc.out)->required();

  DiagnoseArgs diagnose;
  auto* cmd_diagnose = app.add_subcommand("diagnose", "QQ diagnostics");
  cmd_diagnose->add_option("--fit", diagnose.fit)->required();
  cmd_diagnose->add_option("--out-re", diagnose.out_re);
  cmd_diagnose->add_option("--out-init", diagnose.out_init);
  cmd_diagnose->add_option("--t-prime", diagnose.t_prime);

  SimulateArgs simulate;
  auto* cmd_simulate = app.add_subcommand("simulate", "trial simulator");
  cmd_simulate->add_option("--config", simulate.config)->required();
  auto* simulate_seed = cmd_simulate->add_option("--seed", simulate.seed);
  cmd_simulate->add_option("--out-csv", simulate.out_csv)->required();
  cmd_simulate->add_option("--out-meta", simulate.out_meta)->required();

  PowerArgs power;
  auto* cmd_power = app.add_subcommand("power", "Monte Carlo test power");
  cmd_power->add_option("--method", power.method)
      ->check(CLI::IsMember({"lrt", "bst"}));
  cmd_power->add_option("--expectation", power.expectations)->required();
  cmd_power->add_option("--ratio", power.ratios)->required();
  cmd_power->add_option("--replications", power.replications);
  cmd_power->add_option("--bootstrap", power.bootstrap);
  cmd_power->add_option("--level", power.level);
  auto* power_seed = cmd_power->add_option("--seed", power.seed);
  cmd_power->add_option("--out", power.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 64;
  }
  test.have_seed = test_seed->count() > 0;

  // a missing seed on a stochastic subcommand is a validation error, not a
  // usage error: no silent nondeterminism
  auto require_seed = [](CLI::App* cmd, CLI::Option* opt) {
    if (cmd->parsed() && opt->count() == 0) {
      std::cerr << "error: --seed is required for '" << cmd->get_name()
                << "'\n";
      return true;
    }
    return false;
  };
  if (require_seed(cmd_fit, fit_seed) ||
      require_seed(cmd_forecast, forecast_seed) ||
      require_seed(cmd_ttc, ttc_seed) ||
      require_seed(cmd_simulate, simulate_seed) ||
      require_seed(cmd_power, power_seed))
    return 2;

  try {
    if (cmd_ingest->parsed()) return run_ingest(ingest, ctx);
    if (cmd_test->parsed()) return run_test(test, ctx);
    if (cmd_fit->parsed()) return run_fit(fit, ctx);
    if (cmd_forecast->parsed()) return run_forecast(forecast, ctx);
    if (cmd_ttc->parsed()) return run_ttc(ttc, ctx);
    if (cmd_diagnose->parsed()) return run_diagnose(diagnose, ctx);
    if (cmd_simulate->parsed()) return run_simulate(simulate, ctx);
    if (cmd_power->parsed()) return run_power(power, ctx);
  } catch (const accrue::FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return 3;
  } catch (const accrue::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const accrue::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const accrue::InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 64;
}
