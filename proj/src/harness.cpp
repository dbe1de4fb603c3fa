#include "gwr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gwr/errors.hpp"
#include "gwr/exact_reduced.hpp"
#include "gwr/limit_laws.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/simulator.hpp"
#include "gwr/stats.hpp"

#ifndef GWR_VERSION
#define GWR_VERSION "0.1.0"
#endif

namespace gwr {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  }
  return v;
}

template <class T, class Conv>
std::vector<T> to_list(const std::string& key, const std::string& value, Conv conv) {
  std::vector<T> out;
  std::string_view rest = value;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    out.push_back(static_cast<T>(conv(key, trim(rest.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' needs at least one value");
  return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string_view regime_name(Regime regime) {
  return regime == Regime::SmallPhi ? "small_phi" : "linear_band";
}

Regime parse_regime(std::string_view text) {
  if (text == "small_phi") return Regime::SmallPhi;
  if (text == "linear_band") return Regime::LinearBand;
  throw ConfigError("unknown regime '" + std::string(text) + "' (expected small_phi or linear_band)");
}

PhiExpr PhiExpr::parse(std::string_view raw) {
  std::string text = trim(raw);
  PhiExpr e;
  if (text == "sqrt") {
    e.kind = Kind::Sqrt;
    e.param = 0.5;
    return e;
  }
  if (text.rfind("n^", 0) == 0) {
    e.kind = Kind::Power;
    e.param = to_double("phi", text.substr(2));
    if (!(e.param > 0.0 && e.param < 1.0)) throw ConfigError("phi exponent must lie in (0,1)");
    return e;
  }
  auto star = text.find("*n");
  if (star != std::string::npos && star + 2 == text.size()) {
    e.kind = Kind::Linear;
    e.param = to_double("phi", text.substr(0, star));
    if (!(e.param > 0.0)) throw ConfigError("phi constant must be positive");
    return e;
  }
  throw ConfigError("phi must be 'sqrt', 'n^p' or 'c*n', got '" + text + "'");
}

std::string PhiExpr::text() const {
  switch (kind) {
    case Kind::Sqrt: return "sqrt";
    case Kind::Power: return "n^" + fmt_double(param);
    case Kind::Linear: return fmt_double(param) + "*n";
  }
  return {};
}

int PhiExpr::operator()(int n) const {
  switch (kind) {
    case Kind::Sqrt: return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    case Kind::Power: return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), param)));
    case Kind::Linear: return static_cast<int>(std::floor(param * n));
  }
  return 0;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "experiment_id") {
    experiment_id = value;
  } else if (key == "law") {
    OffspringLaw::parse(value);  // validate early
    law = value;
  } else if (key == "regime") {
    regime = parse_regime(value);
  } else if (key == "n" || key == "n_grid") {
    n_grid = to_list<int>(key, value, to_u64);
  } else if (key == "x") {
    x = to_double(key, value);
  } else if (key == "t") {
    t = to_double(key, value);
  } else if (key == "a") {
    a = to_double(key, value);
  } else if (key == "phi") {
    phi = PhiExpr::parse(value);
  } else if (key == "replicates") {
    replicates = to_u64(key, value);
  } else if (key == "max_replicates") {
    max_replicates = to_u64(key, value);
  } else if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "epsilon") {
    epsilon = to_double(key, value);
  } else if (key == "bootstrap") {
    bootstrap = static_cast<int>(to_u64(key, value));
  } else if (key == "s_grid") {
    s_grid = to_list<double>(key, value, to_double);
  } else if (key == "threshold") {
    threshold = to_double(key, value);
  } else if (key == "threads") {
    threads = static_cast<int>(to_u64(key, value));
  } else if (key == "out") {
    out = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(std::string_view(line).substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void ExperimentConfig::validate() const {
  if (!OffspringLaw::parse(law).aperiodic()) {
    throw ConfigError("limit comparisons need an aperiodic offspring law; '" + law + "' is periodic");
  }
  if (n_grid.empty()) throw ConfigError("n_grid is empty");
  for (int n : n_grid) {
    if (n < 2) throw ConfigError("every n must be at least 2");
  }
  if (regime == Regime::SmallPhi) {
    if (!(x > 0.0)) throw ConfigError("x must be positive");
    if (!phi.sublinear()) throw ConfigError("small_phi regime needs phi(n) = o(n): use sqrt or n^p");
  } else {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0,1)");
    if (!(a > 0.0)) throw ConfigError("a must be positive");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
  for (double s : s_grid) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("s_grid values must lie in [0,1]");
  }
  if (replicates > 0 && bootstrap < 2) throw ConfigError("bootstrap needs at least 2 resamples");
}

std::map<std::string, std::string> ExperimentConfig::canonical() const {
  return {
      {"experiment_id", experiment_id},
      {"law", OffspringLaw::parse(law).id()},
      {"regime", std::string(regime_name(regime))},
      {"n_grid", join(n_grid)},
      {"x", fmt_double(x)},
      {"t", fmt_double(t)},
      {"a", fmt_double(a)},
      {"phi", phi.text()},
      {"replicates", std::to_string(replicates)},
      {"max_replicates", std::to_string(max_replicates)},
      {"seed", std::to_string(seed)},
      {"epsilon", fmt_double(epsilon)},
      {"bootstrap", std::to_string(bootstrap)},
      {"s_grid", join(s_grid.empty() ? stats::default_s_grid() : s_grid)},
      {"threshold", fmt_double(threshold)},
  };
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : canonical()) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

bool ComparisonReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

std::string version_string() { return GWR_VERSION; }

namespace {

ComparisonRow compute_row(const ExperimentConfig& cfg, const OffspringLaw& law, int n, std::size_t row_index) {
  const double B = law.B();
  ComparisonRow row;
  row.n = n;
  row.epsilon = cfg.epsilon;

  std::function<double(double)> limit_gf;
  double mrca_limit = 0.0;
  if (cfg.regime == Regime::SmallPhi) {
    const int phi_n = cfg.phi(n);
    const int u = static_cast<int>(std::floor(cfg.x * phi_n));
    row.m = n - u;
    row.C = static_cast<int>(std::floor(B * phi_n));
    row.mrca_u = u;
    if (u < 1 || row.m < 1) throw ConfigError("x*phi(n) must lie in [1, n-1] for n=" + std::to_string(n));
    row.limit_pmf = limits::reduced_small_pmf_series(cfg.x);
    limit_gf = [x = cfg.x](double s) { return limits::gf_small_phi(s, x); };
    mrca_limit = limits::mrca_cdf_small_phi(cfg.x);
    row.event_asymptotic = phi_n / (static_cast<double>(n) * n * B);
  } else {
    row.m = static_cast<int>(std::floor(cfg.t * n));
    row.C = static_cast<int>(std::floor(cfg.a * B * n));
    row.mrca_u = row.m;
    if (row.m < 1 || row.m >= n) throw ConfigError("t*n must lie in [1, n-1] for n=" + std::to_string(n));
    row.limit_pmf = limits::band_pmf_series(cfg.t, cfg.a);
    limit_gf = [t = cfg.t, a = cfg.a](double s) { return limits::gf_linear_band(s, t, a); };
    mrca_limit = limits::mrca_cdf_band(cfg.t, cfg.a);
    row.event_asymptotic = -std::expm1(-cfg.a) / (B * n);
  }
  if (row.C < 1) throw ConfigError("terminal bound C rounds to zero for n=" + std::to_string(n));

  ReducedLawTable table = conditional_reduced_pmf(law, row.m, n, row.C, 0, cfg.epsilon);
  row.exact_pmf = table.pmf;
  row.mass_accounted = table.mass_accounted;
  row.event_prob = table.event_prob;
  row.tv_exact_limit = stats::tv_distance(row.exact_pmf, row.limit_pmf);
  const std::vector<double> grid = cfg.s_grid.empty() ? stats::default_s_grid() : cfg.s_grid;
  row.gf_supnorm = stats::gf_supnorm([&](double s) { return stats::table_gf(row.exact_pmf, s); }, limit_gf, grid);
  row.mrca_exact = mrca_distance_cdf(law, n, row.C, {row.mrca_u})[0];
  row.mrca_limit = mrca_limit;

  if (cfg.replicates > 0) {
    std::uint64_t max_reps = cfg.max_replicates;
    if (max_reps == 0) {
      max_reps = static_cast<std::uint64_t>(std::ceil(20.0 * static_cast<double>(cfg.replicates) / row.event_prob));
    }
    std::uint64_t mix = cfg.seed;
    const std::uint64_t row_seed = splitmix64(mix) ^ (0x9e3779b97f4a7c15ULL * (row_index + 1));
    SimBatch batch = run_conditioned_batch(law, n, row.C, {row.m}, cfg.replicates, max_reps, row_seed);

    McSummary mc;
    mc.replicates = batch.replicates;
    mc.accepted = batch.accepted;
    mc.budget_rejected = batch.budget_rejected;
    mc.low_confidence = batch.low_confidence;
    mc.acceptance_rate = batch.acceptance_rate();
    mc.acceptance_se = batch.acceptance_se();
    mc.acceptance_z = mc.acceptance_se > 0.0 ? (mc.acceptance_rate - row.event_prob) / mc.acceptance_se
                                             : std::numeric_limits<double>::infinity();
    if (batch.accepted > 0) {
      std::vector<std::uint64_t> samples;
      samples.reserve(batch.reduced_counts.size());
      for (const auto& r : batch.reduced_counts) samples.push_back(r[0]);
      const int j_cap = std::max<int>(static_cast<int>(row.exact_pmf.size()),
                                      static_cast<int>(*std::max_element(samples.begin(), samples.end())));
      mc.tv_mc_exact = stats::tv_distance(stats::empirical_pmf(samples, j_cap), row.exact_pmf);
      mc.tv_mc_exact_se = stats::bootstrap_tv_se(samples, row.exact_pmf, cfg.bootstrap, row_seed + 1);
      stats::ChiSquareResult chi = stats::chi_square_gof(samples, row.exact_pmf);
      mc.chi_square = chi.statistic;
      mc.chi_square_dof = chi.dof;
      mc.chi_square_p = chi.p_value;
      const auto within = std::count_if(batch.mrca_distances.begin(), batch.mrca_distances.end(),
                                        [u = row.mrca_u](int d) { return d <= u; });
      mc.mrca_empirical = static_cast<double>(within) / static_cast<double>(batch.accepted);
    }
    row.mc = mc;
  }
  return row;
}

Verdict verdict(std::string name, bool passed, double measured, double threshold, std::string detail) {
  return {std::move(name), passed, measured, threshold, std::move(detail)};
}

}  // namespace

ComparisonReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const OffspringLaw law = OffspringLaw::parse(cfg.law);

  ComparisonReport report;
  report.experiment_id = cfg.experiment_id;
  report.config_hash = cfg.hash();
  report.law = law.id();
  report.regime = cfg.regime;
  report.config = cfg.canonical();
  report.version = version_string();
  report.timestamp = utc_timestamp();

  std::vector<int> grid = cfg.n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (std::size_t i = 0; i < grid.size(); ++i) report.rows.push_back(compute_row(cfg, law, grid[i], i));

  const auto& rows = report.rows;
  const ComparisonRow& last = rows.back();

  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    worst_ratio = std::max(worst_ratio, rows[i].tv_exact_limit / rows[i - 1].tv_exact_limit);
  }
  if (rows.size() > 1) {
    report.verdicts.push_back(verdict("tv_exact_limit_decreasing", worst_ratio < 1.0, worst_ratio, 1.0,
                                      "max ratio of consecutive TV(exact, limit) over increasing n"));
  }
  report.verdicts.push_back(verdict("tv_exact_limit_final", last.tv_exact_limit < cfg.threshold, last.tv_exact_limit,
                                    cfg.threshold, "TV(exact, limit) at n=" + std::to_string(last.n)));
  report.verdicts.push_back(verdict("gf_supnorm_final", last.gf_supnorm < cfg.threshold, last.gf_supnorm,
                                    cfg.threshold, "sup_s |E s^Z exact - limit gf| at n=" + std::to_string(last.n)));
  const double mrca_gap = std::abs(last.mrca_exact - last.mrca_limit);
  report.verdicts.push_back(verdict("mrca_cdf_final", mrca_gap < cfg.threshold, mrca_gap, cfg.threshold,
                                    "|P(d(n) <= u | H) - limit| at n=" + std::to_string(last.n) +
                                        ", u=" + std::to_string(last.mrca_u)));
  if (cfg.replicates > 0) {
    double min_p = 1.0, max_z = 0.0;
    for (const auto& r : rows) {
      min_p = std::min(min_p, r.mc->chi_square_p);
      max_z = std::max(max_z, std::abs(r.mc->acceptance_z));
    }
    report.verdicts.push_back(verdict("mc_chi_square", min_p > 1e-3, min_p, 1e-3,
                                      "smallest chi-square p-value of MC vs exact conditional law"));
    report.verdicts.push_back(verdict("mc_acceptance_rate", max_z < 4.0, max_z, 4.0,
                                      "largest |acceptance rate - P(H)| in standard errors"));
  }
  return report;
}

nlohmann::json to_json(const ComparisonReport& report, bool include_timestamp) {
  nlohmann::json j;
  j["experiment_id"] = report.experiment_id;
  j["config_hash"] = report.config_hash;
  j["law"] = report.law;
  j["regime"] = std::string(regime_name(report.regime));
  j["config"] = report.config;
  j["version"] = report.version;
  if (include_timestamp) j["timestamp"] = report.timestamp;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {
        {"n", r.n},
        {"m", r.m},
        {"C", r.C},
        {"epsilon", r.epsilon},
        {"mass_accounted", r.mass_accounted},
        {"exact_pmf", r.exact_pmf},
        {"limit_pmf", r.limit_pmf},
        {"tv_exact_limit", r.tv_exact_limit},
        {"gf_supnorm", r.gf_supnorm},
        {"mrca_u", r.mrca_u},
        {"mrca_exact", r.mrca_exact},
        {"mrca_limit", r.mrca_limit},
        {"event_prob", r.event_prob},
        {"event_asymptotic", r.event_asymptotic},
    };
    if (r.mc) {
      const McSummary& mc = *r.mc;
      row["mc"] = {
          {"replicates", mc.replicates},
          {"accepted", mc.accepted},
          {"budget_rejected", mc.budget_rejected},
          {"low_confidence", mc.low_confidence},
          {"acceptance_rate", mc.acceptance_rate},
          {"acceptance_se", mc.acceptance_se},
          {"acceptance_z", number_or_null(mc.acceptance_z)},
          {"tv_mc_exact", mc.tv_mc_exact},
          {"tv_mc_exact_se", mc.tv_mc_exact_se},
          {"chi_square", number_or_null(mc.chi_square)},
          {"chi_square_dof", mc.chi_square_dof},
          {"chi_square_p", mc.chi_square_p},
          {"mrca_empirical", mc.mrca_empirical},
      };
    } else {
      row["mc"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"passed", v.passed},
                        {"measured", number_or_null(v.measured)},
                        {"threshold", v.threshold},
                        {"detail", v.detail}});
  }
  j["verdicts"] = std::move(verdicts);
  return j;
}

std::string to_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "n,m,C,epsilon,mass_accounted,tv_exact_limit,gf_supnorm,mrca_u,mrca_exact,mrca_limit,event_prob,"
        "event_asymptotic,mc_replicates,mc_accepted,mc_tv,mc_tv_se,mc_chi_square_p,mc_acceptance_rate,"
        "mc_acceptance_se\n";
  for (const auto& r : report.rows) {
    os << r.n << ',' << r.m << ',' << r.C << ',' << r.epsilon << ',' << r.mass_accounted << ',' << r.tv_exact_limit
       << ',' << r.gf_supnorm << ',' << r.mrca_u << ',' << r.mrca_exact << ',' << r.mrca_limit << ','
       << r.event_prob << ',' << r.event_asymptotic;
    if (r.mc) {
      os << ',' << r.mc->replicates << ',' << r.mc->accepted << ',' << r.mc->tv_mc_exact << ','
         << r.mc->tv_mc_exact_se << ',' << r.mc->chi_square_p << ',' << r.mc->acceptance_rate << ','
         << r.mc->acceptance_se;
    } else {
      os << ",,,,,,,";
    }
    os << '\n';
  }
  return os.str();
}

std::string summary_table(const ComparisonReport& report) {
  std::ostringstream os;
  os << report.experiment_id << "  law=" << report.law << "  regime=" << regime_name(report.regime)
     << "  config_hash=" << report.config_hash << '\n';
  os << std::setw(7) << "n" << std::setw(7) << "m" << std::setw(7) << "C" << std::setw(13) << "TV(ex,lim)"
     << std::setw(13) << "gf sup" << std::setw(13) << "mrca ex" << std::setw(13) << "mrca lim" << std::setw(13)
     << "P(H)" << std::setw(13) << "TV(mc,ex)" << '\n';
  os << std::setprecision(6);
  for (const auto& r : report.rows) {
    os << std::setw(7) << r.n << std::setw(7) << r.m << std::setw(7) << r.C << std::setw(13) << r.tv_exact_limit
       << std::setw(13) << r.gf_supnorm << std::setw(13) << r.mrca_exact << std::setw(13) << r.mrca_limit
       << std::setw(13) << r.event_prob << std::setw(13);
    if (r.mc) {
      os << r.mc->tv_mc_exact;
    } else {
      os << "-";
    }
    os << '\n';
  }
  for (const auto& v : report.verdicts) {
    os << (v.passed ? "PASS " : "FAIL ") << v.name << "  measured=" << v.measured << "  threshold=" << v.threshold
       << "  (" << v.detail << ")\n";
  }
  return os.str();
}

void write_report(const ComparisonReport& report, const std::string& prefix) {
  std::ofstream json_out(prefix + ".json");
  if (!json_out) throw ConfigError("cannot write '" + prefix + ".json'");
  json_out << to_json(report).dump(2) << '\n';
  std::ofstream csv_out(prefix + ".csv");
  if (!csv_out) throw ConfigError("cannot write '" + prefix + ".csv'");
  csv_out << to_csv(report);
}

}  // namespace gwr
