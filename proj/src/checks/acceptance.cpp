#include "checks/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "checks/brute_force.hpp"
#include "checks/closed_forms.hpp"
#include "gwr/exact_reduced.hpp"
#include "gwr/harness.hpp"
#include "gwr/jet.hpp"
#include "gwr/limit_laws.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/parallel.hpp"
#include "gwr/series.hpp"
#include "gwr/simulator.hpp"
#include "gwr/stats.hpp"

namespace gwr::checks {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<OffspringLaw> builtin_laws() {
  return {OffspringLaw::make_builtin(Family::LinearFractional), OffspringLaw::make_builtin(Family::Poisson),
          OffspringLaw::make_builtin(Family::TernaryUniform)};
}

int ceil_sqrt(int n) { return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))); }

// Accumulates a pass flag and a ';'-separated detail line.
struct Report {
  bool ok = true;
  std::ostringstream detail;
  bool first = true;

  void note(const std::string& text) {
    if (!first) detail << "; ";
    detail << text;
    first = false;
  }
  void require(bool condition, const std::string& text) {
    if (!condition) ok = false;
    note(text + (condition ? "" : " [FAIL]"));
  }
  CriterionResult result(int id, std::string title) const { return {id, std::move(title), ok, detail.str(), 0.0}; }
};

CriterionResult linear_fractional_oracles() {
  auto start = Clock::now();
  const auto law = OffspringLaw::make_builtin(Family::LinearFractional);
  constexpr int kN = 100, kK = 200, kR = 100;
  double err_q = 0.0, err_pmf = 0.0, err_der = 0.0;

  const auto path = pmf_Zn_path(law, kN, kK);
  for (int n = 0; n <= kN; ++n) {
    err_q = std::max(err_q, std::abs(extinction_prob(law, n) - lf_extinction(n)));
    for (int k = 0; k <= kK; ++k) err_pmf = std::max(err_pmf, std::abs(path[n][k] - lf_pmf(n, k)));
  }
  for (int r = 0; r <= kR; ++r) {
    const auto jets = derivative_jet_path(law, kN, extinction_prob(law, r), 1);
    for (int n = 0; n <= kN; ++n)
      err_der = std::max(err_der, std::abs(jets[n].values[1] - lf_derivative_at_extinction(n, r)));
  }
  const double secs = seconds_since(start);
  Report rep;
  rep.require(err_q < 1e-10, fmt("max |q_n - n/(n+1)| = %.2e", err_q));
  rep.require(err_pmf < 1e-10, fmt("max pmf error = %.2e", err_pmf));
  rep.require(err_der < 1e-10, fmt("max f_n'(q_r) error = %.2e", err_der));
  rep.require(secs < 10.0, fmt("%.2f s < 10 s", secs));
  return rep.result(1, "linear fractional closed forms");
}

CriterionResult brute_force_oracles() {
  auto start = Clock::now();
  const auto law = OffspringLaw::make_builtin(Family::TernaryUniform);
  double err_reduced = 0.0, err_joint = 0.0, err_mrca = 0.0, err_event = 0.0;
  long compared = 0;

  for (int n = 1; n <= 4; ++n) {
    const BruteForceTrees trees({1, 2, 1}, 4, n);
    const int pop = trees.max_population();
    for (int m = 0; m <= n; ++m) {
      const auto table = reduced_pmf(law, m, n, pop);
      for (int j = 1; j <= pop; ++j) {
        err_reduced = std::max(err_reduced, std::abs(table.p(j) - trees.reduced(m, j).convert_to<double>()));
        ++compared;
      }
    }
    for (int C = 1; C <= 3; ++C) {
      const double event = trees.event(C).convert_to<double>();
      err_event = std::max(err_event, std::abs(event_H_prob(law, n, C) - event));
      for (int m = 0; m <= n; ++m) {
        const auto joint = joint_reduced_bounded(law, m, n, C, C);
        for (int j = 1; j <= pop; ++j) {
          err_joint = std::max(err_joint,
                               std::abs(joint.p(j) - trees.reduced_bounded(m, j, C).convert_to<double>()));
          ++compared;
        }
      }
      std::vector<int> grid(n + 1);
      for (int u = 0; u <= n; ++u) grid[u] = u;
      const auto cdf = mrca_distance_cdf(law, n, C, grid);
      for (int u = 0; u <= n; ++u) {
        // u = 0 is the event Z(n) = 1; otherwise d(n) <= u from each tree's genealogy.
        const Rational num = u == 0 ? trees.reduced_bounded(n, 1, C) : trees.mrca_bounded(u, C);
        err_mrca = std::max(err_mrca, std::abs(cdf[u] - (num / trees.event(C)).convert_to<double>()));
        ++compared;
      }
    }
  }
  const double secs = seconds_since(start);
  Report rep;
  rep.require(err_reduced < 1e-12, fmt("reduced_pmf %.1e", err_reduced));
  rep.require(err_joint < 1e-12, fmt("joint_reduced_bounded %.1e", err_joint));
  rep.require(err_mrca < 1e-12, fmt("mrca_distance_cdf %.1e", err_mrca));
  rep.require(err_event < 1e-12, fmt("event_H_prob %.1e", err_event));
  rep.note(fmt("%ld values", compared));
  rep.require(secs < 60.0, fmt("%.2f s < 60 s", secs));
  return rep.result(2, "ternary uniform exhaustive enumeration");
}

CriterionResult decomposition_consistency() {
  struct Case {
    int m, n, C;
  };
  double worst = 0.0;
  std::string worst_case;
  int cases = 0;
  for (const auto& law : builtin_laws()) {
    const double B = law.B();
    std::vector<Case> grid;
    for (int n : {100, 500, 2000}) {
      const int phi = ceil_sqrt(n);
      grid.push_back({n - phi, n, static_cast<int>(std::floor(B * phi))});
    }
    for (int n : {200, 1000}) grid.push_back({n / 2, n, static_cast<int>(std::floor(B * n))});
    grid.push_back({1, 50, 5});
    grid.push_back({29, 30, 3});
    for (const auto& c : grid) {
      const int J = std::min(kMaxJetOrder, c.C);
      const auto joint = joint_reduced_bounded(law, c.m, c.n, c.C, J);
      double sum = 0.0;
      for (double p : joint.pmf) sum += p;
      const double diff = std::abs(sum - event_H_prob(law, c.n, c.C));
      if (diff >= worst) {
        worst = diff;
        worst_case = fmt("%s m=%d n=%d C=%d", law.id().c_str(), c.m, c.n, c.C);
      }
      ++cases;
    }
  }
  Report rep;
  rep.require(cases >= 20, fmt("%d combinations", cases));
  rep.require(worst < 1e-8, fmt("max |sum - P(H)| = %.2e at %s", worst, worst_case.c_str()));
  return rep.result(3, "joint table sums to P(0<Z(n)<=C)");
}

CriterionResult survival_asymptotics() {
  Report rep;
  for (const auto& law : builtin_laws()) {
    const double dev = survival_prob(law, 1000) * law.B() * 1000.0 - 1.0;
    rep.require(std::abs(dev) < 0.05, fmt("%s %+.4f", law.id().c_str(), dev));
  }
  return rep.result(4, "Q(n) Bn -> 1 at n=1000");
}

CriterionResult local_limit() {
  constexpr int n = 2000;
  Report rep;
  for (const auto& law : builtin_laws()) {
    if (!law.aperiodic()) continue;
    const double B = law.B();
    const int K = static_cast<int>(std::floor(B * n));
    const auto series = pmf_Zn(law, n, K);
    double worst = 0.0, tail_worst = 0.0;
    int worst_k = 1;
    for (int k = 1; k <= K; ++k) {
      const double scaled = n * static_cast<double>(n) * B * B * std::pow(1.0 + 1.0 / (B * n), k + 1) * series[k];
      const double dev = std::abs(scaled - 1.0);
      if (dev > worst) {
        worst = dev;
        worst_k = k;
      }
      if (k >= 10) tail_worst = std::max(tail_worst, dev);
    }
    rep.require(worst < 0.05, fmt("%s max dev %.4f at k=%d (k>=10: %.4f)", law.id().c_str(), worst, worst_k,
                                  tail_worst));
  }
  return rep.result(5, "local limit of P(Z(n)=k) at n=2000");
}

CriterionResult small_band_event() {
  Report rep;
  for (const auto& law : builtin_laws()) {
    const double B = law.B();
    std::vector<double> ratios;
    for (int n : {500, 1000, 2000}) {
      const int C = static_cast<int>(std::floor(B * std::sqrt(static_cast<double>(n))));
      const double scale = std::sqrt(static_cast<double>(n)) / (static_cast<double>(n) * n * B);
      ratios.push_back(event_H_prob(law, n, C) / scale);
    }
    const bool in_band = ratios[2] >= 0.85 && ratios[2] <= 1.15;
    const bool toward = std::abs(ratios[2] - 1.0) < std::abs(ratios[0] - 1.0);
    rep.require(in_band && toward,
                fmt("%s %.4f/%.4f/%.4f", law.id().c_str(), ratios[0], ratios[1], ratios[2]));
  }
  return rep.result(6, "P(0<Z(n)<=B sqrt n) ~ sqrt n/(n^2 B)");
}

CriterionResult small_phi_convergence() {
  auto start = Clock::now();
  const auto law = OffspringLaw::make_builtin(Family::LinearFractional);
  const auto limit = limits::reduced_small_pmf_series(1.0);
  std::vector<double> tv;
  for (int n : {500, 1000, 2000}) {
    const int phi = ceil_sqrt(n);
    const int C = static_cast<int>(std::floor(law.B() * phi));
    const auto table = conditional_reduced_pmf(law, n - phi, n, C);
    tv.push_back(stats::tv_distance(table.pmf, limit));
  }
  const double secs = seconds_since(start);
  Report rep;
  rep.require(tv[0] > tv[1] && tv[1] > tv[2], fmt("TV %.4f/%.4f/%.4f decreasing", tv[0], tv[1], tv[2]));
  rep.require(tv[2] < 0.05, "TV(2000) < 0.05");
  rep.require(secs < 300.0, fmt("%.2f s < 300 s", secs));
  return rep.result(7, "small-phi reduced law converges (linear fractional)");
}

CriterionResult band_convergence() {
  constexpr double t = 0.5, a = 1.0;
  const auto limit = limits::band_pmf_series(t, a);
  const auto grid = stats::default_s_grid();
  Report rep;
  for (const auto& law : builtin_laws()) {
    std::vector<double> tv;
    double sup = 0.0;
    for (int n : {200, 500, 1000}) {
      const int C = static_cast<int>(std::floor(a * law.B() * n));
      const auto table = conditional_reduced_pmf(law, static_cast<int>(std::floor(t * n)), n, C);
      tv.push_back(stats::tv_distance(table.pmf, limit));
      sup = stats::gf_supnorm([&](double s) { return stats::table_gf(table.pmf, s); },
                              [&](double s) { return limits::gf_linear_band(s, t, a); }, grid);
    }
    const bool ok = tv[0] > tv[1] && tv[1] > tv[2] && tv[2] < 0.05 && sup < 0.05;
    rep.require(ok, fmt("%s TV %.4f/%.4f/%.4f sup %.4f", law.id().c_str(), tv[0], tv[1], tv[2], sup));
  }
  return rep.result(8, "linear-band reduced law converges (t=0.5, a=1)");
}

CriterionResult mrca_limits() {
  Report rep;
  {
    constexpr int n = 2000;
    const auto law = OffspringLaw::make_builtin(Family::LinearFractional);
    const int phi = ceil_sqrt(n);
    const int C = static_cast<int>(std::floor(law.B() * phi));
    for (double x : {0.5, 1.0, 2.0}) {
      const int u = static_cast<int>(std::floor(x * phi));
      const double exact = mrca_distance_cdf(law, n, C, {u})[0];
      const double lim = limits::mrca_cdf_small_phi(x);
      rep.require(std::abs(exact - lim) < 0.05,
                  fmt("%s x=%g %.4f vs %.4f", law.id().c_str(), x, exact, lim));
    }
  }
  constexpr int n = 1000;
  constexpr double a = 1.0;
  for (const auto& law : builtin_laws()) {
    const int C = static_cast<int>(std::floor(a * law.B() * n));
    for (double t : {0.25, 0.5, 0.75}) {
      const int u = static_cast<int>(std::floor(t * n));
      const double exact = mrca_distance_cdf(law, n, C, {u})[0];
      const double lim = limits::mrca_cdf_band(t, a);
      rep.require(std::abs(exact - lim) < 0.05, fmt("%s t=%g %.4f vs %.4f", law.id().c_str(), t, exact, lim));
    }
  }
  return rep.result(9, "MRCA distance cdf limits");
}

CriterionResult monte_carlo_agreement() {
  auto start = Clock::now();
  constexpr int n = 200;
  constexpr std::uint64_t kAccepted = 100'000;
  Report rep;
  for (auto family : {Family::TernaryUniform, Family::LinearFractional}) {
    const auto law = OffspringLaw::make_builtin(family);
    const int C = static_cast<int>(std::floor(law.B() * n));
    const int m = n / 2;
    const double H = event_H_prob(law, n, C);
    const auto exact = conditional_reduced_pmf(law, m, n, C);
    const auto max_replicates = static_cast<std::uint64_t>(20.0 * kAccepted / H);
    const auto batch = run_conditioned_batch(law, n, C, {m}, kAccepted, max_replicates, 20240611);
    std::vector<std::uint64_t> counts;
    counts.reserve(batch.accepted);
    for (const auto& row : batch.reduced_counts) counts.push_back(row[0]);
    const auto chi = stats::chi_square_gof(counts, exact.pmf);
    const double z = (batch.acceptance_rate() - H) / batch.acceptance_se();
    rep.require(batch.accepted == kAccepted && chi.p_value > 0.001 && std::abs(z) < 4.0,
                fmt("%s accepted %llu of %llu, chi2 %.1f dof %d p=%.3f, rate z=%+.2f", law.id().c_str(),
                    static_cast<unsigned long long>(batch.accepted),
                    static_cast<unsigned long long>(batch.replicates), chi.statistic, chi.dof, chi.p_value, z));
    if (batch.budget_rejected > 0)
      rep.note(fmt("%llu budget rejections", static_cast<unsigned long long>(batch.budget_rejected)));
  }
  const double secs = seconds_since(start);
  rep.require(secs < 600.0, fmt("%.1f s < 600 s", secs));
  return rep.result(10, "Monte Carlo vs exact at n=200");
}

bool approaching_one(const std::vector<double>& ratios) {
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (!(std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0))) return false;
  return true;
}

CriterionResult derivative_asymptotics() {
  Report rep;
  for (const auto& law : builtin_laws()) {
    const double B = law.B();
    // f_n^{(k)}(q_n) against k! (Bn)^{k-1} / 2^{k+1}
    std::vector<std::vector<double>> same_n(5);
    for (int n : {500, 1000, 2000}) {
      const auto jet = derivative_jet(law, n, extinction_prob(law, n), 4);
      for (int k = 1; k <= 4; ++k)
        same_n[k].push_back(jet.values[k] / (std::tgamma(k + 1.0) * std::pow(B * n, k - 1) / std::pow(2.0, k + 1)));
    }
    bool ok1 = true;
    double worst1 = 0.0;
    for (int k = 1; k <= 4; ++k) {
      ok1 = ok1 && same_n[k][2] >= 0.9 && same_n[k][2] <= 1.1 && approaching_one(same_n[k]);
      worst1 = std::max(worst1, std::abs(same_n[k][2] - 1.0));
    }
    rep.require(ok1, fmt("%s f_n^(k)(q_n) max|r-1| %.4f", law.id().c_str(), worst1));

    // f_m^{(j)}(q_phi) against j! (B phi)^{j+1} / (B n)^2, m = n - phi
    std::vector<std::vector<double>> shifted(4);
    for (int n : {10'000, 40'000, 160'000}) {
      const int phi = ceil_sqrt(n);
      const auto jet = derivative_jet(law, n - phi, extinction_prob(law, phi), 3);
      for (int j = 1; j <= 3; ++j)
        shifted[j].push_back(jet.values[j] /
                            (std::tgamma(j + 1.0) * std::pow(B * phi, j + 1) / (B * B * static_cast<double>(n) * n)));
    }
    bool ok2 = true;
    double worst2 = 0.0;
    for (int j = 1; j <= 3; ++j) {
      ok2 = ok2 && shifted[j][2] >= 0.9 && shifted[j][2] <= 1.1 && approaching_one(shifted[j]);
      worst2 = std::max(worst2, std::abs(shifted[j][2] - 1.0));
    }
    rep.require(ok2, fmt("%s f_m^(j)(q_phi) max|r-1| %.4f", law.id().c_str(), worst2));
  }
  return rep.result(11, "derivative jet asymptotics");
}

CriterionResult limit_law_consistency() {
  double duality_small = 0.0, duality_band = 0.0, regime = 0.0;
  bool monotone = true;
  for (int i = 1; i <= 9; ++i) {
    const double s = i / 10.0;
    for (double x : {0.25, 1.0, 4.0}) {
      const auto pmf = limits::reduced_small_pmf_series(x);
      duality_small = std::max(duality_small, std::abs(stats::table_gf(pmf, s) - limits::gf_small_phi(s, x)));
    }
    for (double t : {0.2, 0.5, 0.8}) {
      for (double a : {0.5, 1.0, 2.0}) {
        const auto pmf = limits::band_pmf_series(t, a);
        duality_band =
            std::max(duality_band, std::abs(stats::table_gf(pmf, s) - limits::gf_linear_band(s, t, a)));
      }
    }
  }
  for (int i = 1; i <= 9; ++i) {
    const double s = i / 10.0;
    for (int k = 1; k <= 9; ++k) {
      const double t = k / 10.0;
      regime = std::max(regime, std::abs(limits::gf_linear_band(s, t, 50.0) - limits::classical_reduced_gf(s, t)));
      double prev = limits::gf_linear_band(s, t, 0.5);
      for (double a : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
        const double cur = limits::gf_linear_band(s, t, a);
        monotone = monotone && cur <= prev;
        prev = cur;
      }
    }
    regime = std::max(regime, std::abs(limits::mrca_cdf_band(s, 50.0) - s));
  }
  Report rep;
  rep.require(duality_small < 1e-10, fmt("small-phi duality %.1e", duality_small));
  rep.require(duality_band < 1e-10, fmt("band duality %.1e", duality_band));
  rep.require(regime < 1e-10, fmt("a=50 vs classical %.1e", regime));
  rep.require(monotone, "gf nonincreasing in a");
  return rep.result(12, "limit law gf/pmf duality and a->inf");
}

CriterionResult determinism() {
  auto config = ExperimentConfig::parse(
      "experiment_id = determinism\n"
      "law = ternary_uniform\n"
      "regime = linear_band\n"
      "n_grid = 60,120\n"
      "t = 0.5\n"
      "a = 1\n"
      "replicates = 2000\n"
      "seed = 99\n");
  const int before = worker_count();
  const int many = std::max(4, static_cast<int>(std::thread::hardware_concurrency()));
  set_worker_count(1);
  const auto one = run_experiment(config);
  set_worker_count(many);
  const auto other = run_experiment(config);
  const auto again = run_experiment(config);
  set_worker_count(before);

  const auto a = to_json(one, false).dump();
  const auto b = to_json(other, false).dump();
  const auto c = to_json(again, false).dump();
  Report rep;
  rep.require(a == b && to_csv(one) == to_csv(other), fmt("1 vs %d workers identical", many));
  rep.require(b == c, "rerun identical");
  rep.note(fmt("hash %s, %zu bytes", one.config_hash.c_str(), a.size()));
  return rep.result(13, "reports independent of worker count");
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> criteria = {
      {1, "linear fractional closed forms", true, linear_fractional_oracles},
      {2, "ternary uniform exhaustive enumeration", true, brute_force_oracles},
      {3, "joint table sums to P(0<Z(n)<=C)", true, decomposition_consistency},
      {4, "Q(n) Bn -> 1 at n=1000", true, survival_asymptotics},
      {5, "local limit of P(Z(n)=k) at n=2000", false, local_limit},
      {6, "P(0<Z(n)<=B sqrt n) ~ sqrt n/(n^2 B)", true, small_band_event},
      {7, "small-phi reduced law converges", false, small_phi_convergence},
      {8, "linear-band reduced law converges", false, band_convergence},
      {9, "MRCA distance cdf limits", false, mrca_limits},
      {10, "Monte Carlo vs exact at n=200", false, monte_carlo_agreement},
      {11, "derivative jet asymptotics", true, derivative_asymptotics},
      {12, "limit law gf/pmf duality and a->inf", true, limit_law_consistency},
      {13, "reports independent of worker count", true, determinism},
  };
  return criteria;
}

CriterionResult run_criterion(const Criterion& criterion) {
  const auto start = Clock::now();
  CriterionResult result;
  try {
    result = criterion.run();
  } catch (const std::exception& e) {
    result = {criterion.id, criterion.title, false, std::string("exception: ") + e.what(), 0.0};
  }
  result.id = criterion.id;
  result.title = criterion.title;
  result.seconds = seconds_since(start);
  return result;
}

std::string format_result(const CriterionResult& result) {
  return fmt("%s %2d  %-40s %7.2f s  ", result.passed ? "PASS" : "FAIL", result.id, result.title.c_str(),
             result.seconds) +
         result.detail;
}

}  // namespace gwr::checks
