#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gwr {

enum class Regime { SmallPhi, LinearBand };

std::string_view regime_name(Regime regime);
Regime parse_regime(std::string_view text);

// Restricted growth expression for phi(n): "sqrt" (ceil(sqrt n)), "n^p" with
// p in (0,1) (ceil(n^p)), or "c*n" (floor(c n)).
struct PhiExpr {
  enum class Kind { Sqrt, Power, Linear };
  Kind kind = Kind::Sqrt;
  double param = 0.5;

  static PhiExpr parse(std::string_view text);
  std::string text() const;
  int operator()(int n) const;
  bool sublinear() const { return kind != Kind::Linear; }
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::string law = "linear_fractional";
  Regime regime = Regime::SmallPhi;
  std::vector<int> n_grid = {500, 1000, 2000};
  double x = 1.0;  // SmallPhi: m = n - floor(x phi(n)), C = floor(B phi(n))
  double t = 0.5;  // LinearBand: m = floor(t n), C = floor(a B n)
  double a = 1.0;
  PhiExpr phi;
  std::uint64_t replicates = 0;      // accepted Monte Carlo replicates per row, 0 disables
  std::uint64_t max_replicates = 0;  // 0 picks 20 * replicates / P(H)
  std::uint64_t seed = 1;
  double epsilon = 1e-9;
  int bootstrap = 200;
  std::vector<double> s_grid;  // empty selects {0, 0.1, ..., 1}
  double threshold = 0.05;
  int threads = 0;  // execution only; never part of the report
  std::string out;

  // Flat "key = value" text; '#' starts a comment.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);
  // Applies one key/value pair; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  // Every setting that determines the report content, in canonical form.
  std::map<std::string, std::string> canonical() const;
  // FNV-1a over canonical(); hex string.
  std::string hash() const;
};

struct McSummary {
  std::uint64_t replicates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t budget_rejected = 0;
  bool low_confidence = false;
  double acceptance_rate = 0.0;
  double acceptance_se = 0.0;
  double acceptance_z = 0.0;  // (rate - exact P(H)) / se
  double tv_mc_exact = 0.0;
  double tv_mc_exact_se = 0.0;  // bootstrap
  double chi_square = 0.0;
  int chi_square_dof = 0;
  double chi_square_p = 1.0;
  double mrca_empirical = 0.0;  // empirical P(d(n) <= u) at the scaled point
};

struct ComparisonRow {
  int n = 0;
  int m = 0;
  int C = 0;
  int mrca_u = 0;  // distance at which the MRCA cdf is compared
  double epsilon = 0.0;
  double mass_accounted = 0.0;
  std::vector<double> exact_pmf;
  std::vector<double> limit_pmf;
  double tv_exact_limit = 0.0;
  double gf_supnorm = 0.0;
  double mrca_exact = 0.0;
  double mrca_limit = 0.0;
  double event_prob = 0.0;
  double event_asymptotic = 0.0;
  std::optional<McSummary> mc;
};

struct Verdict {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ComparisonReport {
  std::string experiment_id;
  std::string config_hash;
  std::string law;
  Regime regime = Regime::SmallPhi;
  std::map<std::string, std::string> config;
  std::vector<ComparisonRow> rows;
  std::vector<Verdict> verdicts;
  std::string version;
  std::string timestamp;

  bool all_passed() const;
};

// Exact tables, limit laws, optional Monte Carlo and verdicts for every n.
ComparisonReport run_experiment(const ExperimentConfig& config);

// The timestamp is the only field that varies between identical runs.
nlohmann::json to_json(const ComparisonReport& report, bool include_timestamp = true);
// One row per n with fixed column order.
std::string to_csv(const ComparisonReport& report);
std::string summary_table(const ComparisonReport& report);
// Writes <prefix>.json and <prefix>.csv.
void write_report(const ComparisonReport& report, const std::string& prefix);

std::string version_string();

}  // namespace gwr
