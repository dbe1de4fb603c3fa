#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gwr/errors.hpp"
#include "gwr/exact_reduced.hpp"
#include "gwr/limit_laws.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/parallel.hpp"
#include "gwr/rng.hpp"
#include "gwr/series.hpp"
#include "gwr/simulator.hpp"
#include "gwr/stats.hpp"

using namespace gwr;

namespace {

std::vector<OffspringLaw> builtins() {
  return {OffspringLaw::make_builtin(Family::LinearFractional), OffspringLaw::make_builtin(Family::Poisson),
          OffspringLaw::make_builtin(Family::TernaryUniform)};
}

// |observed frequency - p| in binomial standard errors
double z_score(std::uint64_t hits, std::uint64_t trials, double p) {
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return (static_cast<double>(hits) / static_cast<double>(trials) - p) / se;
}

void check_same(const SimBatch& a, const SimBatch& b) {
  CHECK(a.replicates == b.replicates);
  CHECK(a.accepted == b.accepted);
  CHECK(a.budget_rejected == b.budget_rejected);
  CHECK(a.low_confidence == b.low_confidence);
  CHECK(a.replicate_ids == b.replicate_ids);
  CHECK(a.terminal_sizes == b.terminal_sizes);
  CHECK(a.mrca_distances == b.mrca_distances);
  CHECK(a.reduced_counts == b.reduced_counts);
}

}  // namespace

TEST_CASE("rng streams") {
  Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs_c |= x != c();
    differs_d |= x != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  Rng u(1, 0);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
    mean += v;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("offspring sampler reproduces the law") {
  const OffspringLaw laws[] = {OffspringLaw::make_builtin(Family::LinearFractional),
                               OffspringLaw::make_builtin(Family::Poisson),
                               OffspringLaw::make_builtin(Family::TernaryUniform),
                               OffspringLaw::parse("linear_fractional:0.4"),
                               OffspringLaw::make_custom({0.35, 0.4, 0.2, 0.0, 0.05})};
  for (const auto& law : laws) {
    INFO(law.id());
    const OffspringSampler sample(law);
    Rng rng(5, 1);
    constexpr int kDraws = 200000;
    std::vector<std::uint64_t> draws(kDraws);
    for (auto& d : draws) d = sample(rng);
    for (int k = 0; k <= 4; ++k) {
      const auto hits = static_cast<std::uint64_t>(std::count(draws.begin(), draws.end(), static_cast<std::uint64_t>(k)));
      const double p = law.pmf(k);
      if (p == 0.0) {
        CHECK(hits == 0);
      } else {
        CHECK(std::abs(z_score(hits, kDraws, p)) < 4.5);
      }
    }
  }
}

TEST_CASE("tree records") {
  const auto law = OffspringLaw::make_builtin(Family::TernaryUniform);
  Rng rng(11, 0);
  for (int rep = 0; rep < 500; ++rep) {
    const auto rec = simulate_tree(law, 25, rng);
    REQUIRE(rec.n() == 25);
    CHECK(rec.sizes[0] == 1);
    bool extinct = false;
    for (int g = 0; g < 25; ++g) {
      const auto& counts = rec.offspring_counts[g];
      CHECK(counts.size() == rec.sizes[g]);
      CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == rec.sizes[g + 1]);
      if (extinct) CHECK(rec.sizes[g] == 0);
      extinct = extinct || rec.sizes[g] == 0;
    }
  }
  Rng big(1, 3);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 1000; ++i) simulate_tree(OffspringLaw::make_builtin(Family::LinearFractional), 200, big, 50);
      }(),
      NodeBudgetExceeded);
}

TEST_CASE("reduced profile on a hand-built tree") {
  // generation 0: root with 3 children; generation 1: counts (0, 2, 1);
  // generation 2: counts (0, 1, 2) so only the 2nd and 3rd individuals of
  // generation 1 survive to generation 3.
  GenealogyRecord rec;
  rec.offspring_counts = {{3}, {0, 2, 1}, {0, 1, 2}};
  rec.sizes = {1, 3, 3, 3};
  const auto profile = reduced_profile(rec);
  CHECK(profile == std::vector<std::uint64_t>{1, 2, 2, 3});
  CHECK(mrca_distance(rec) == 3);
  CHECK(reduced_counts(rec, {3, 0, 1}) == std::vector<std::uint64_t>{3, 1, 2});

  // single surviving line: Z(m,n) = 1 for all m
  GenealogyRecord line;
  line.offspring_counts = {{2}, {0, 1}};
  line.sizes = {1, 2, 1};
  CHECK(reduced_profile(line) == std::vector<std::uint64_t>{1, 1, 1});
  CHECK(mrca_distance(line) == 1);

  GenealogyRecord dead;
  dead.offspring_counts = {{1}, {0}};
  dead.sizes = {1, 1, 0};
  CHECK_FALSE(mrca_distance(dead).has_value());
}

TEST_CASE("one generation: extinction frequency is f_0") {
  for (const auto& law : builtins()) {
    Rng rng(2, 0);
    const OffspringSampler sample(law);
    GenealogyRecord rec;
    std::uint64_t extinct = 0;
    constexpr int kReps = 100000;
    for (int i = 0; i < kReps; ++i) {
      simulate_tree_into(rec, sample, 1, rng, kDefaultNodeBudget);
      extinct += rec.sizes[1] == 0;
    }
    CHECK(std::abs(z_score(extinct, kReps, law.pmf(0))) < 4.0);
  }
}

TEST_CASE("linear fractional survival to generation 10") {
  const auto law = OffspringLaw::make_builtin(Family::LinearFractional);
  const OffspringSampler sample(law);
  GenealogyRecord rec;
  std::uint64_t alive = 0;
  constexpr int kReps = 1000000;
  for (int i = 0; i < kReps; ++i) {
    Rng rng(77, i);
    simulate_tree_into(rec, sample, 10, rng, kDefaultNodeBudget);
    alive += rec.sizes[10] > 0;
  }
  CHECK(std::abs(z_score(alive, kReps, 1.0 / 11)) < 3.0);
}

TEST_CASE("criticality: mean population stays at one") {
  for (const auto& law : builtins()) {
    INFO(law.id());
    constexpr int kReps = 200000, n = 20;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < kReps; ++i) {
      Rng rng(9, i);
      const double z = static_cast<double>(simulate_population_size(law, n, rng));
      sum += z;
      sq += z * z;
    }
    const double mean = sum / kReps;
    const double se = std::sqrt((sq / kReps - mean * mean) / kReps);
    CHECK(std::abs(mean - 1.0) < 4.0 * se);
    // Var Z(n) = 2Bn exactly
    CHECK(sq / kReps - mean * mean == doctest::Approx(2.0 * law.B() * n).epsilon(0.1));
  }
}

TEST_CASE("size-only path matches the exact law of Z(n)") {
  for (const auto& law : builtins()) {
    INFO(law.id());
    constexpr int kReps = 100000, n = 6;
    std::vector<std::uint64_t> draws;
    std::uint64_t zero = 0;
    for (int i = 0; i < kReps; ++i) {
      Rng rng(4, i);
      const auto z = simulate_population_size(law, n, rng);
      if (z == 0) ++zero; else draws.push_back(z);
    }
    CHECK(std::abs(z_score(zero, kReps, extinction_prob(law, n))) < 4.0);
    const auto positive = conditioned_positive_pmf(law, n, 200);
    std::vector<double> pmf(positive.coeffs.begin() + 1, positive.coeffs.end());
    CHECK(stats::chi_square_gof(draws, pmf).p_value > 0.001);
  }
}

TEST_CASE("Yaglom limit of the conditioned population") {
  for (auto family : {Family::LinearFractional, Family::Poisson}) {
    const auto law = OffspringLaw::make_builtin(family);
    constexpr int n = 200;
    std::vector<double> scaled;
    for (std::uint64_t i = 0; scaled.size() < 20000; ++i) {
      Rng rng(31, i);
      const auto z = simulate_population_size(law, n, rng);
      if (z > 0) scaled.push_back(static_cast<double>(z) / (law.B() * n));
    }
    CHECK(stats::ks_distance(scaled, limits::yaglom_cdf) < 0.03);
  }
}

TEST_CASE("reduced counts of Z(1,3) and MRCA distance match the exact laws") {
  const auto law = OffspringLaw::make_builtin(Family::TernaryUniform);
  const OffspringSampler sample(law);
  GenealogyRecord rec;
  constexpr std::uint64_t kReps = 1000000;
  std::vector<std::uint64_t> z13(5, 0), mrca(4, 0);
  std::uint64_t alive = 0;
  for (std::uint64_t i = 0; i < kReps; ++i) {
    Rng rng(123, i);
    simulate_tree_into(rec, sample, 3, rng, kDefaultNodeBudget);
    const auto profile = reduced_profile(rec);
    if (profile[3] == 0) continue;
    ++alive;
    ++z13[profile[1]];
    ++mrca[*mrca_distance_from_profile(profile)];
  }
  const auto exact = reduced_pmf(law, 1, 3, 4);
  for (int j = 1; j <= 2; ++j) CHECK(std::abs(z_score(z13[j], kReps, exact.p(j))) < 3.0);
  CHECK(z13[3] + z13[4] == 0);

  // C = 8 is the largest possible Z(3), so the bound only conditions on survival
  const auto cdf = mrca_distance_cdf(law, 3, 8, {1, 2, 3});
  std::uint64_t below = 0;
  for (int u = 1; u <= 3; ++u) {
    below += mrca[u];
    const double p = cdf[u - 1];
    if (p < 1.0) CHECK(std::abs(z_score(below, alive, p)) < 3.0);
    else CHECK(below == alive);
  }
}

TEST_CASE("conditioned batch: parallel equals serial for any worker count") {
  const int before = worker_count();
  for (const auto& law : builtins()) {
    const auto serial = run_conditioned_batch_serial(law, 60, 30, {30, 0, 59, 60}, 300, 200000, 17);
    for (int threads : {1, 2, 5}) {
      set_worker_count(threads);
      for (std::uint64_t chunk : {std::uint64_t{1000}, std::uint64_t{1} << 16}) {
        BatchOptions opts;
        opts.chunk = chunk;
        check_same(run_conditioned_batch(law, 60, 30, {30, 0, 59, 60}, 300, 200000, 17, opts), serial);
      }
    }
  }
  set_worker_count(before);
}

TEST_CASE("conditioned batch invariants") {
  const auto law = OffspringLaw::make_builtin(Family::Poisson);
  const int n = 80, C = 6;
  const std::vector<int> queries = {0, 20, 40, 60, 79, 80};
  const auto b = run_conditioned_batch(law, n, C, queries, 5000, 10000000, 3);
  REQUIRE(b.accepted == 5000);
  CHECK(b.accepted <= b.replicates);
  CHECK(b.replicate_ids.back() == b.replicates - 1);
  CHECK_FALSE(b.low_confidence);
  for (std::size_t r = 0; r < b.accepted; ++r) {
    const auto& z = b.reduced_counts[r];
    CHECK(z[0] == 1);
    CHECK(z[5] == b.terminal_sizes[r]);
    for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] >= z[i - 1]);
    CHECK(b.terminal_sizes[r] >= 1);
    CHECK(b.terminal_sizes[r] <= static_cast<std::uint64_t>(C));
    CHECK(b.mrca_distances[r] >= 1);
    CHECK(b.mrca_distances[r] <= n);
  }
  const double H = event_H_prob(law, n, C);
  CHECK(std::abs(b.acceptance_rate() - H) < 4.0 * b.acceptance_se());
}

TEST_CASE("conditioned batch agrees with the exact conditional law") {
  const auto law = OffspringLaw::make_builtin(Family::Poisson);
  const int n = 40, m = 20, C = 20;
  const auto b = run_conditioned_batch(law, n, C, {m}, 30000, 100000000, 8);
  std::vector<std::uint64_t> counts;
  for (const auto& row : b.reduced_counts) counts.push_back(row[0]);
  const auto exact = conditional_reduced_pmf(law, m, n, C);
  CHECK(stats::chi_square_gof(counts, exact.pmf).p_value > 0.001);

  std::vector<int> grid(n + 1);
  std::iota(grid.begin(), grid.end(), 0);
  const auto cdf = mrca_distance_cdf(law, n, C, grid);
  for (int u : {5, 20, 35}) {
    const auto below = static_cast<std::uint64_t>(
        std::count_if(b.mrca_distances.begin(), b.mrca_distances.end(), [&](int d) { return d <= u; }));
    CHECK(std::abs(z_score(below, b.accepted, cdf[u])) < 4.0);
  }
}

TEST_CASE("batch edge cases") {
  const auto law = OffspringLaw::make_builtin(Family::LinearFractional);
  const auto few = run_conditioned_batch(law, 100, 1, {50}, 1000, 200, 1);
  CHECK(few.replicates == 200);
  CHECK(few.low_confidence);

  BatchOptions tiny;
  tiny.node_budget = 20;
  const auto capped = run_conditioned_batch(law, 100, 100, {50}, 100000, 20000, 1, tiny);
  CHECK(capped.budget_rejected > 0);
  CHECK(capped.budget_bias_bound() ==
        doctest::Approx(static_cast<double>(capped.budget_rejected) / static_cast<double>(capped.replicates)));

  CHECK_THROWS_AS(run_conditioned_batch(law, 0, 5, {0}, 10, 100, 1), DomainError);
  CHECK_THROWS_AS(run_conditioned_batch(law, 10, 0, {5}, 10, 100, 1), DomainError);
  CHECK_THROWS_AS(run_conditioned_batch(law, 10, 5, {11}, 10, 100, 1), DomainError);
  CHECK_THROWS_AS(run_conditioned_batch(law, 10, 5, {5}, 0, 100, 1), DomainError);
}
