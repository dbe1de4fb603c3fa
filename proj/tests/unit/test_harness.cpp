#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gwr/errors.hpp"
#include "gwr/exact_reduced.hpp"
#include "gwr/harness.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/serialize.hpp"
#include "gwr/simulator.hpp"

using namespace gwr;

TEST_CASE("phi expressions") {
  CHECK(PhiExpr::parse("sqrt")(1000) == 32);
  CHECK(PhiExpr::parse("sqrt")(2000) == 45);
  CHECK(PhiExpr::parse("n^0.5")(1000) == 32);
  CHECK(PhiExpr::parse("n^0.25")(10000) == 10);
  CHECK(PhiExpr::parse("0.5*n")(1001) == 500);
  CHECK(PhiExpr::parse("sqrt").sublinear());
  CHECK_FALSE(PhiExpr::parse("0.5*n").sublinear());
  CHECK(PhiExpr::parse(PhiExpr::parse("n^0.3").text()).param == doctest::Approx(0.3));
  CHECK_THROWS_AS(PhiExpr::parse("n^1.5"), ConfigError);
  CHECK_THROWS_AS(PhiExpr::parse("log"), ConfigError);
  CHECK_THROWS_AS(PhiExpr::parse("-2*n"), ConfigError);
}

TEST_CASE("config parsing") {
  const auto cfg = ExperimentConfig::parse(
      "# comment\n"
      "experiment_id = demo\n"
      "law = poisson   # trailing comment\n"
      "regime = linear_band\n"
      "n_grid = 200, 500,1000\n"
      "t = 0.25\n"
      "a = 2\n"
      "\n"
      "seed = 12\n");
  CHECK(cfg.experiment_id == "demo");
  CHECK(cfg.law == "poisson");
  CHECK(cfg.regime == Regime::LinearBand);
  CHECK(cfg.n_grid == std::vector<int>{200, 500, 1000});
  CHECK(cfg.t == 0.25);
  CHECK(cfg.a == 2.0);
  CHECK(cfg.seed == 12);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(ExperimentConfig::parse("colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("seed\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("seed = -3\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("x = abc\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("regime = huge\n"), ConfigError);
  CHECK_THROWS(ExperimentConfig::parse("law = nonsense\n"));
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("config validation") {
  auto bad = [](const std::string& text) {
    const auto cfg = ExperimentConfig::parse(text);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  bad("phi = 0.5*n\n");
  bad("regime = linear_band\nt = 1\n");
  bad("regime = linear_band\na = 0\n");
  bad("x = 0\n");
  bad("epsilon = 0\n");
  bad("n_grid = 1\n");
  bad("s_grid = 0, 1.5\n");
  bad("law = custom:0.5,0,0.5\n");
}

TEST_CASE("config hash") {
  auto a = ExperimentConfig::parse("law = poisson\nseed = 3\n");
  auto b = a;
  b.out = "somewhere/else";
  b.threads = 7;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.seed = 4;
  CHECK(a.hash() != b.hash());
  // equivalent spellings hash alike
  auto c = ExperimentConfig::parse("law=poisson\nseed=3\nn_grid=500,1000,2000\nphi=sqrt\n");
  CHECK(a.hash() == c.hash());
  CHECK(a.canonical().count("out") == 0);
  CHECK(a.canonical().count("threads") == 0);
}

TEST_CASE("experiment report") {
  const auto cfg = ExperimentConfig::parse(
      "experiment_id = unit\n"
      "law = linear_fractional\n"
      "n_grid = 400, 100\n"
      "replicates = 500\n"
      "seed = 5\n");
  const auto report = run_experiment(cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].n == 100);  // rows are ordered by n
  const auto& row = report.rows[1];
  CHECK(row.n == 400);
  CHECK(row.m == 380);
  CHECK(row.C > 0);
  CHECK(row.mass_accounted >= 1.0 - 1e-9);
  CHECK(row.tv_exact_limit >= 0.0);
  CHECK(row.tv_exact_limit <= 1.0);
  CHECK(row.gf_supnorm >= 0.0);
  REQUIRE(row.mc.has_value());
  CHECK(row.mc->accepted == 500);
  CHECK(row.mc->tv_mc_exact_se > 0.0);
  CHECK(report.rows[1].tv_exact_limit < report.rows[0].tv_exact_limit);

  CHECK(report.config_hash == cfg.hash());
  CHECK(report.version == version_string());
  CHECK_FALSE(report.timestamp.empty());

  const auto j = to_json(report);
  CHECK(j["config"]["seed"] == "5");
  CHECK(j["rows"][1]["mc"]["accepted"] == 500);
  CHECK(j.contains("timestamp"));
  CHECK_FALSE(to_json(report, false).contains("timestamp"));
  bool found = false;
  for (const auto& v : j["verdicts"]) found |= v["name"] == "mc_chi_square";
  CHECK(found);

  const auto csv = to_csv(report);
  CHECK(csv.rfind("n,m,C,epsilon,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  // identical rerun apart from the timestamp
  CHECK(to_json(run_experiment(cfg), false) == to_json(report, false));

  const auto dir = std::filesystem::temp_directory_path() / "gwr_harness_test";
  std::filesystem::create_directories(dir);
  const auto prefix = (dir / "report").string();
  write_report(report, prefix);
  std::ifstream in(prefix + ".json");
  const auto back = nlohmann::json::parse(in);
  CHECK(back["config_hash"] == report.config_hash);
  CHECK(std::filesystem::exists(prefix + ".csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("linear band report") {
  const auto cfg = ExperimentConfig::parse("regime = linear_band\nlaw = ternary_uniform\nn_grid = 200, 500\n");
  const auto report = run_experiment(cfg);
  CHECK(report.rows[0].m == 100);
  CHECK(report.rows[0].C > 0);
  CHECK(report.rows[0].mrca_u == 100);
  CHECK(report.rows[1].tv_exact_limit < report.rows[0].tv_exact_limit);
  CHECK(report.all_passed());
}

TEST_CASE("table and batch serialization") {
  const auto law = OffspringLaw::make_builtin(Family::Poisson);
  const auto table = conditional_reduced_pmf(law, 90, 100, 10);
  const auto j = to_json(table);
  CHECK(j["law"] == "poisson");
  CHECK(j["kind"] == "conditional");
  CHECK(j["n"] == 100);
  CHECK(j["m"] == 90);
  CHECK(j["C"] == 10);
  CHECK(j["pmf"].size() == table.pmf.size());
  CHECK(j["epsilon"] == table.epsilon);
  const auto csv = to_csv(table);
  CHECK(csv.rfind("j,p\n1,", 0) == 0);

  const auto unbounded = to_json(reduced_pmf(law, 5, 10, 4));
  CHECK(unbounded["C"].is_null());

  const auto batch = run_conditioned_batch(law, 30, 8, {15, 29}, 50, 100000, 1);
  const auto bj = to_json(batch);
  CHECK(bj["accepted"] == 50);
  CHECK(bj["query_generations"] == nlohmann::json{15, 29});
  CHECK(bj.contains("stream_derivation"));
  const auto bcsv = to_csv(batch);
  CHECK(bcsv.rfind("replicate_id,Z_n,d_n,Z_15_n,Z_29_n\n", 0) == 0);
  CHECK(std::count(bcsv.begin(), bcsv.end(), '\n') == 51);
}
