// gwr: exact reduced-process laws, conditioned simulation, limit laws and
// exact-vs-limit comparison reports.
//
// Exit codes: 0 success, 1 usage or input error, 2 internal invariant violation.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "checks/acceptance.hpp"
#include "gwr/errors.hpp"
#include "gwr/exact_reduced.hpp"
#include "gwr/harness.hpp"
#include "gwr/jet.hpp"
#include "gwr/limit_laws.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/parallel.hpp"
#include "gwr/serialize.hpp"
#include "gwr/series.hpp"
#include "gwr/simulator.hpp"
#include "gwr/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

gwr::OffspringLaw load_law(const std::string& spec) {
  auto law = gwr::OffspringLaw::parse(spec);
  if (!law.aperiodic()) std::cerr << "warning: law '" << spec << "' is periodic; local limits do not apply\n";
  return law;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Output {
  std::string format = "json";
  std::string path;

  bool csv() const { return format == "csv"; }

  void write(const std::string& text) const {
    const bool newline = !text.empty() && text.back() != '\n';
    if (path.empty()) {
      std::cout << text << (newline ? "\n" : "");
      return;
    }
    std::ofstream out(path);
    if (!out) throw gwr::ConfigError("cannot write '" + path + "'");
    out << text << (newline ? "\n" : "");
  }
};

void add_output_options(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", out.path, "Output file (stdout when omitted)");
}

struct ExactArgs {
  std::string law = "linear_fractional";
  int n = 0;
  int m = -1;
  std::optional<int> bound;
  int j_max = 0;
  double epsilon = gwr::kDefaultTableEpsilon;
  bool joint = false;
  std::vector<int> mrca;
  Output out;
};

int run_exact(const ExactArgs& a) {
  const auto law = load_law(a.law);
  if (!a.mrca.empty()) {
    if (!a.bound) throw gwr::ConfigError("--mrca needs --bound");
    const auto cdf = gwr::mrca_distance_cdf(law, a.n, *a.bound, a.mrca);
    if (a.out.csv()) {
      std::string text = "u,cdf\n";
      for (std::size_t i = 0; i < cdf.size(); ++i) text += std::to_string(a.mrca[i]) + "," + number(cdf[i]) + "\n";
      a.out.write(text);
    } else {
      nlohmann::json j = {{"law", law.id()}, {"n", a.n}, {"C", *a.bound}, {"u", a.mrca}, {"cdf", cdf}};
      a.out.write(j.dump(2));
    }
    return kExitOk;
  }
  if (a.m < 0) throw gwr::ConfigError("--m is required unless --mrca is given");

  gwr::ReducedLawTable table;
  if (!a.bound) {
    if (a.joint) throw gwr::ConfigError("--joint needs --bound");
    table = gwr::reduced_pmf(law, a.m, a.n, a.j_max > 0 ? a.j_max : gwr::kMaxJetOrder);
  } else if (a.joint) {
    table = gwr::joint_reduced_bounded(law, a.m, a.n, *a.bound, a.j_max, a.epsilon);
  } else {
    table = gwr::conditional_reduced_pmf(law, a.m, a.n, *a.bound, a.j_max, a.epsilon);
  }
  a.out.write(a.out.csv() ? gwr::to_csv(table) : gwr::to_json(table).dump(2));
  return kExitOk;
}

struct SimulateArgs {
  std::string law = "linear_fractional";
  int n = 0;
  int bound = 0;
  std::vector<int> m;
  std::uint64_t replicates = 1000;
  std::uint64_t max_replicates = 0;
  std::uint64_t seed = 1;
  std::uint64_t node_budget = gwr::kDefaultNodeBudget;
  Output out;
};

int run_simulate(const SimulateArgs& a) {
  const auto law = load_law(a.law);
  std::vector<int> queries = a.m;
  if (queries.empty()) queries.push_back(a.n / 2);
  std::uint64_t max_replicates = a.max_replicates;
  if (max_replicates == 0) {
    const double H = gwr::event_H_prob(law, a.n, a.bound);
    if (!(H > 0.0)) throw gwr::ConditioningImpossible("P(0 < Z(n) <= C) is zero; nothing can be accepted");
    max_replicates = static_cast<std::uint64_t>(20.0 * static_cast<double>(a.replicates) / H) + 1;
  }
  gwr::BatchOptions options;
  options.node_budget = a.node_budget;
  const auto batch = gwr::run_conditioned_batch(law, a.n, a.bound, queries, a.replicates, max_replicates, a.seed, options);
  if (batch.low_confidence) std::cerr << "warning: fewer than 10 accepted replicates\n";
  a.out.write(a.out.csv() ? gwr::to_csv(batch) : gwr::to_json(batch).dump(2));
  return kExitOk;
}

struct LimitsArgs {
  std::string regime = "small_phi";
  double x = 1.0;
  double t = 0.5;
  double a = 1.0;
  int j_max = 0;
  Output out;
};

int run_limits(const LimitsArgs& a) {
  namespace L = gwr::limits;
  const auto regime = gwr::parse_regime(a.regime);
  const bool small = regime == gwr::Regime::SmallPhi;
  if (small && !(a.x > 0.0)) throw gwr::DomainError("x must be positive");
  if (!small && !(a.t >= 0.0 && a.t < 1.0)) throw gwr::DomainError("t must lie in [0,1)");
  if (!small && !(a.a > 0.0)) throw gwr::DomainError("a must be positive");

  const auto pmf = small ? L::reduced_small_pmf_series(a.x, a.j_max) : L::band_pmf_series(a.t, a.a, a.j_max);
  if (a.out.csv()) {
    std::string text = "j,p\n";
    for (std::size_t j = 0; j < pmf.size(); ++j) text += std::to_string(j + 1) + "," + number(pmf[j]) + "\n";
    a.out.write(text);
    return kExitOk;
  }
  nlohmann::json j;
  j["regime"] = gwr::regime_name(regime);
  std::vector<double> s_grid = gwr::stats::default_s_grid(), gf;
  for (double s : s_grid) gf.push_back(small ? L::gf_small_phi(s, a.x) : L::gf_linear_band(s, a.t, a.a));
  if (small) {
    j["x"] = a.x;
    j["mrca_cdf"] = L::mrca_cdf_small_phi(a.x);
  } else {
    j["t"] = a.t;
    j["a"] = a.a;
    if (a.t > 0.0) j["mrca_cdf"] = L::mrca_cdf_band(a.t, a.a);
  }
  j["pmf"] = pmf;
  j["gf"] = {{"s", s_grid}, {"value", gf}};
  a.out.write(j.dump(2));
  return kExitOk;
}

struct CompareArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::string> law, regime, phi, n;
  std::optional<double> x, t, a, epsilon;
  std::optional<std::uint64_t> replicates, seed;
  std::string format = "json";
  std::string out;
};

int run_compare(const CompareArgs& a, int threads) {
  auto config = a.config_path.empty() ? gwr::ExperimentConfig{} : gwr::ExperimentConfig::load(a.config_path);
  if (a.law) config.set("law", *a.law);
  if (a.regime) config.set("regime", *a.regime);
  if (a.phi) config.set("phi", *a.phi);
  if (a.n) config.set("n_grid", *a.n);
  if (a.x) config.x = *a.x;
  if (a.t) config.t = *a.t;
  if (a.a) config.a = *a.a;
  if (a.epsilon) config.epsilon = *a.epsilon;
  if (a.replicates) config.replicates = *a.replicates;
  if (a.seed) config.seed = *a.seed;
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw gwr::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!a.out.empty()) config.out = a.out;
  if (threads > 0) config.threads = threads;
  config.validate();
  gwr::set_worker_count(config.threads);

  const auto report = gwr::run_experiment(config);
  if (config.out.empty()) {
    std::cout << (a.format == "csv" ? gwr::to_csv(report) : gwr::to_json(report).dump(2) + "\n");
    std::cerr << gwr::summary_table(report);
  } else {
    gwr::write_report(report, config.out);
    std::cout << gwr::summary_table(report);
  }
  return kExitOk;
}

int run_selftest(bool full, const std::vector<int>& only) {
  bool all = true;
  int ran = 0;
  for (const auto& criterion : gwr::checks::acceptance_criteria()) {
    const bool wanted = only.empty() ? (full || criterion.fast)
                                     : std::find(only.begin(), only.end(), criterion.id) != only.end();
    if (!wanted) continue;
    const auto result = gwr::checks::run_criterion(criterion);
    std::cout << gwr::checks::format_result(result) << std::endl;
    all = all && result.passed;
    ++ran;
  }
  if (ran == 0) throw gwr::ConfigError("no criterion selected");
  return all ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced Galton-Watson processes: exact laws, simulation and limit comparisons", "gwr"};
  app.set_version_flag("--version", gwr::version_string());
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP worker count (0 keeps the default)")->check(CLI::NonNegativeNumber);

  ExactArgs exact;
  auto* exact_cmd = app.add_subcommand("exact", "Exact law of the reduced count Z(m,n)");
  exact_cmd->add_option("--law", exact.law, "Offspring law: linear_fractional[:B], poisson, ternary_uniform, custom:p0,p1,...");
  exact_cmd->add_option("--n", exact.n, "Observation generation")->required()->check(CLI::NonNegativeNumber);
  exact_cmd->add_option("--m", exact.m, "Reduced generation, 0 <= m <= n")->check(CLI::NonNegativeNumber);
  exact_cmd->add_option("--bound", exact.bound, "Condition on 0 < Z(n) <= bound")->check(CLI::PositiveNumber);
  exact_cmd->add_option("--j-max", exact.j_max, "Table length (0 picks it from --epsilon)")->check(CLI::NonNegativeNumber);
  exact_cmd->add_option("--epsilon", exact.epsilon, "Unaccounted mass allowed when --j-max is 0");
  exact_cmd->add_flag("--joint", exact.joint, "Report P(Z(m,n)=j, 0<Z(n)<=C) instead of the conditional law");
  exact_cmd->add_option("--mrca", exact.mrca, "Distances u: report P(Z(n-u,n)=1 | 0<Z(n)<=C)")->delimiter(',');
  add_output_options(exact_cmd, exact.out);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Rejection-sample trees conditioned on 0 < Z(n) <= bound");
  sim_cmd->add_option("--law", sim.law, "Offspring law");
  sim_cmd->add_option("--n", sim.n, "Observation generation")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--bound", sim.bound, "Upper bound C on Z(n)")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--m", sim.m, "Generations m at which Z(m,n) is recorded (default n/2)")->delimiter(',');
  sim_cmd->add_option("--replicates", sim.replicates, "Accepted replicates wanted")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--max-replicates", sim.max_replicates, "Attempt cap (0 picks 20 * replicates / P(H))");
  sim_cmd->add_option("--seed", sim.seed, "Base seed");
  sim_cmd->add_option("--node-budget", sim.node_budget, "Individuals per replicate before it is discarded")
      ->check(CLI::PositiveNumber);
  add_output_options(sim_cmd, sim.out);

  LimitsArgs lim;
  auto* lim_cmd = app.add_subcommand("limits", "Limit laws of the reduced count");
  lim_cmd->add_option("--regime", lim.regime, "small_phi or linear_band");
  lim_cmd->add_option("--x", lim.x, "small_phi: m = n - x phi(n)");
  lim_cmd->add_option("--t", lim.t, "linear_band: m = t n");
  lim_cmd->add_option("--a", lim.a, "linear_band: Z(n) <= a B n");
  lim_cmd->add_option("--j-max", lim.j_max, "Maximum table length (0: until terms vanish)")->check(CLI::NonNegativeNumber);
  add_output_options(lim_cmd, lim.out);

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Exact vs limit (and Monte Carlo) comparison report");
  cmp_cmd->add_option("--config", cmp.config_path, "Config file of key = value lines")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--law", cmp.law, "Offspring law");
  cmp_cmd->add_option("--regime", cmp.regime, "small_phi or linear_band");
  cmp_cmd->add_option("--n", cmp.n, "Comma-separated n grid");
  cmp_cmd->add_option("--x", cmp.x, "small_phi scale");
  cmp_cmd->add_option("--t", cmp.t, "linear_band fraction");
  cmp_cmd->add_option("--a", cmp.a, "linear_band bound factor");
  cmp_cmd->add_option("--phi", cmp.phi, "phi(n): sqrt, n^p or c*n");
  cmp_cmd->add_option("--epsilon", cmp.epsilon, "Table truncation mass");
  cmp_cmd->add_option("--replicates", cmp.replicates, "Accepted Monte Carlo replicates per n (0 disables)");
  cmp_cmd->add_option("--seed", cmp.seed, "Base seed");
  cmp_cmd->add_option("--set", cmp.overrides, "Any config key as key=value (repeatable)");
  cmp_cmd->add_option("--format", cmp.format, "stdout format when --out is omitted")
      ->check(CLI::IsMember({"json", "csv"}));
  cmp_cmd->add_option("--out", cmp.out, "Write <out>.json and <out>.csv");

  bool full = false;
  std::vector<int> only;
  auto* self_cmd = app.add_subcommand("selftest", "Run the built-in acceptance checks");
  self_cmd->add_flag("--full", full, "Include the slow criteria");
  self_cmd->add_option("--criterion", only, "Run only these criteria")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    gwr::set_worker_count(threads);
    if (*exact_cmd) return run_exact(exact);
    if (*sim_cmd) return run_simulate(sim);
    if (*lim_cmd) return run_limits(lim);
    if (*cmp_cmd) return run_compare(cmp, threads);
    if (*self_cmd) return run_selftest(full, only);
  } catch (const gwr::InvariantViolation& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n--- diagnostic ---\n" << e.diagnostic() << "\n";
    return kExitInternal;
  } catch (const gwr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUser;
}
