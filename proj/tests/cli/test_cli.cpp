#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

const std::string kCli = ACCRUE_CLI_PATH;
const std::string kDir = "/tmp/accrue_cli_test";

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " >" + kDir + "/stdout.txt 2>" +
                    kDir + "/stderr.txt";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

nlohmann::json stdout_json() {
  return nlohmann::json::parse(slurp(kDir + "/stdout.txt"));
}

struct Setup {
  Setup() {
    if (std::system(("mkdir -p " + kDir).c_str()) != 0) std::abort();
  }
} setup_once;

const char* kSimConfig = R"({
  "n_centres": 40,
  "trial_days": 200,
  "alpha": 1.4,
  "phi": 0.05,
  "target": 300,
  "shape": {"kind": "curve", "kappa": 2, "theta": 0.02, "tau_bar": 200},
  "schedule": {"kind": "uniform"}
})";

}  // namespace

TEST_CASE("help exits cleanly, bad usage does not") {
  CHECK(run("--help") == 0);
  CHECK(run("frobnicate") == 64);
  CHECK(run("forecast --no-such-flag") == 64);
  CHECK(run("") == 64);
}

TEST_CASE("stochastic commands demand a seed") {
  write_file(kDir + "/sim.json", kSimConfig);
  CHECK(run("simulate --config " + kDir + "/sim.json --out-csv " + kDir +
            "/t.csv --out-meta " + kDir + "/t.json") == 2);
  std::string err = slurp(kDir + "/stderr.txt");
  CHECK(err.find("--seed") != std::string::npos);
}

TEST_CASE("full pipeline: simulate, ingest, test, fit, forecast, ttc, "
          "diagnose") {
  write_file(kDir + "/sim.json", kSimConfig);
  REQUIRE(run("simulate --config " + kDir + "/sim.json --seed 7 --out-csv " +
              kDir + "/trial.csv --out-meta " + kDir + "/trial.json") == 0);
  auto summary = stdout_json();
  CHECK(summary["centres"] == 40);
  CHECK(summary["total_recruits"].get<long>() > 0);

  // ingest validates and echoes the snapshot summary
  REQUIRE(run("ingest --csv " + kDir + "/trial.csv --meta " + kDir +
              "/trial.json") == 0);
  auto echoed = stdout_json();
  CHECK(echoed["centres"] == 40);
  CHECK(echoed["census_day"] == 200);

  // decay is baked into the simulated truth, so the test should reject
  REQUIRE(run("test --csv " + kDir + "/trial.csv --meta " + kDir +
              "/trial.json --method lrt") == 0);
  auto lrt = stdout_json();
  CHECK(lrt["method"] == "lrt");
  CHECK(lrt["p_value"].get<double>() < 0.05);
  CHECK(lrt["statistic"].get<double>() > 0.0);

  REQUIRE(run("test --csv " + kDir + "/trial.csv --meta " + kDir +
              "/trial.json --method bst --bootstrap 500 --seed 3") == 0);
  auto bst = stdout_json();
  CHECK(bst["n_bootstrap"] == 500);
  CHECK(bst["p_value"].get<double>() < 0.1);

  // fit an ensemble at an interim census
  REQUIRE(run("fit --snapshot " + kDir + "/trial.csv --meta " + kDir +
              "/trial.json --census 120 --samples 1500 --seed 11 --out " +
              kDir + "/fit.json") == 0);
  auto fit = nlohmann::json::parse(slurp(kDir + "/fit.json"));
  CHECK(fit["models"].size() == 5);
  double total_prob = 0.0;
  for (const auto& m : fit["models"])
    total_prob += m["posterior_prob"].get<double>();
  CHECK(total_prob == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit["snapshot"]["census_day"] == 120);

  // forecast to the full horizon, byte-reproducibly (rerun to the same
  // path: the provenance header echoes the full invocation)
  REQUIRE(run("forecast --fit " + kDir + "/fit.json --horizon 200 "
              "--draws 400 --seed 5 --out " + kDir + "/fc1.csv") == 0);
  std::string first_run = slurp(kDir + "/fc1.csv");
  REQUIRE(run("forecast --fit " + kDir + "/fit.json --horizon 200 "
              "--draws 400 --seed 5 --out " + kDir + "/fc1.csv") == 0);
  CHECK(first_run == slurp(kDir + "/fc1.csv"));
  REQUIRE(run("forecast --fit " + kDir + "/fit.json --horizon 200 "
              "--draws 400 --seed 6 --out " + kDir + "/fc3.csv") == 0);
  CHECK(slurp(kDir + "/fc1.csv") != slurp(kDir + "/fc3.csv"));

  // weekly aggregation keeps the final day and shortens the output
  REQUIRE(run("forecast --fit " + kDir + "/fit.json --horizon 200 "
              "--draws 400 --aggregate 7 --seed 5 --out " + kDir +
              "/fc_week.csv") == 0);
  std::string weekly = slurp(kDir + "/fc_week.csv");
  CHECK(weekly.find(",200,") == std::string::npos);  // day is first column
  CHECK(weekly.find("200,") != std::string::npos);
  {
    std::istringstream daily(slurp(kDir + "/fc1.csv")), week(weekly);
    auto lines = [](std::istringstream& s) {
      int n = 0;
      std::string line;
      while (std::getline(s, line)) ++n;
      return n;
    };
    CHECK(lines(week) < lines(daily));
  }

  // time to completion
  REQUIRE(run("ttc --fit " + kDir + "/fit.json --draws 400 --seed 9 "
              "--out " + kDir + "/ttc.csv") == 0);
  std::string ttc = slurp(kDir + "/ttc.csv");
  CHECK(ttc.find("# remaining_target") != std::string::npos);
  CHECK(ttc.find("# infinite_draws") != std::string::npos);

  // diagnostics
  REQUIRE(run("diagnose --fit " + kDir + "/fit.json --out-re " + kDir +
              "/qq_re.csv --out-init " + kDir + "/qq_init.csv") == 0);
  CHECK(slurp(kDir + "/qq_re.csv").find("# slope:") != std::string::npos);
  CHECK(slurp(kDir + "/qq_init.csv").find("# kind: initial_period") !=
        std::string::npos);

  // every CSV artefact carries the provenance header
  for (const char* f : {"/fc1.csv", "/ttc.csv", "/qq_re.csv"}) {
    std::string body = slurp(kDir + f);
    CHECK(body.rfind("# accrue ", 0) == 0);
    CHECK(body.find("# invocation:") != std::string::npos);
    CHECK(body.find("# config_hash:") != std::string::npos);
  }
}

TEST_CASE("validation failures exit with the data error code") {
  write_file(kDir + "/bad.csv", "centre_id,day,count\nA,5,-1\n");
  write_file(kDir + "/bad.json", "{\"census_day\": 10}");
  CHECK(run("ingest --csv " + kDir + "/bad.csv --meta " + kDir +
            "/bad.json") == 2);
  write_file(kDir + "/worse.json", "{not json");
  CHECK(run("ingest --csv " + kDir + "/bad.csv --meta " + kDir +
            "/worse.json") == 2);
  CHECK(run("fit --snapshot " + kDir + "/nonexistent.csv --meta " + kDir +
            "/bad.json --seed 1 --out " + kDir + "/x.json") == 2);
}

TEST_CASE("power grid emits one row per cell") {
  REQUIRE(run("power --method lrt --expectation 20 --expectation 50 "
              "--ratio 1 --ratio 0.7 --replications 2000 --seed 13 --out " +
              kDir + "/power.csv") == 0);
  std::string body = slurp(kDir + "/power.csv");
  int rows = 0;
  std::istringstream ss(body);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' &&
        line.find("expectation") == std::string::npos)
      ++rows;
  CHECK(rows == 4);
}
