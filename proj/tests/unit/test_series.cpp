#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "checks/closed_forms.hpp"
#include "gwr/errors.hpp"
#include "gwr/jet.hpp"
#include "gwr/kernels.hpp"
#include "gwr/offspring_law.hpp"
#include "gwr/parallel.hpp"
#include "gwr/rng.hpp"
#include "gwr/series.hpp"

using namespace gwr;

namespace {

std::vector<OffspringLaw> all_laws() {
  return {OffspringLaw::make_builtin(Family::LinearFractional), OffspringLaw::make_builtin(Family::Poisson),
          OffspringLaw::make_builtin(Family::TernaryUniform), OffspringLaw::parse("linear_fractional:0.3"),
          OffspringLaw::make_custom({0.35, 0.4, 0.2, 0.0, 0.05})};
}

}  // namespace

TEST_CASE("extinction probability examples") {
  const auto lf = OffspringLaw::make_builtin(Family::LinearFractional);
  CHECK(extinction_prob(lf, 0) == 0.0);
  CHECK(extinction_prob(lf, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(extinction_prob(lf, 10) == doctest::Approx(10.0 / 11).epsilon(1e-15));
  for (int n : {1, 10, 1000, 100000}) CHECK(survival_prob(lf, n) * n == doctest::Approx(n / (n + 1.0)).epsilon(1e-12));
}

TEST_CASE("extinction probability is nondecreasing and tends to one") {
  for (const auto& law : all_laws()) {
    const auto Q = survival_probs(law, 5000);
    for (std::size_t n = 1; n < Q.size(); ++n) CHECK(Q[n] <= Q[n - 1]);
    CHECK(Q.back() < 1e-2);
    CHECK(Q.back() > 0.0);
  }
}

TEST_CASE("pmf_Zn examples") {
  const auto lf = OffspringLaw::make_builtin(Family::LinearFractional);
  auto s = pmf_Zn(lf, 2, 3);
  CHECK(s[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(1.0 / 9).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(2.0 / 27).epsilon(1e-15));
  CHECK(s[3] == doctest::Approx(4.0 / 81).epsilon(1e-15));

  for (const auto& law : all_laws()) {
    s = pmf_Zn(law, 0, 5);
    CHECK(s[1] == 1.0);
    CHECK(s[0] + s[2] + s[3] + s[4] + s[5] == 0.0);
  }

  const auto tu = OffspringLaw::make_builtin(Family::TernaryUniform);
  s = pmf_Zn(tu, 1, 2);
  CHECK(s[0] == 0.25);
  CHECK(s[1] == 0.5);
  CHECK(s[2] == 0.25);
  CHECK(s.tail == doctest::Approx(0.0));
}

TEST_CASE("pmf_Zn invariants") {
  for (const auto& law : all_laws()) {
    INFO(law.id());
    const auto a = pmf_Zn(law, 40, 50);
    const auto b = pmf_Zn(law, 40, 200);
    double sum = 0.0;
    for (double c : a.coeffs) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      sum += c;
    }
    CHECK(std::abs(sum + a.tail - 1.0) < 1e-10);
    CHECK(b.tail <= a.tail);
    for (int k = 0; k <= 50; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    CHECK(a[0] == doctest::Approx(extinction_prob(law, 40)).epsilon(1e-13));
  }
}

TEST_CASE("pmf_Zn path agrees with single runs") {
  const auto law = OffspringLaw::make_builtin(Family::Poisson);
  const auto path = pmf_Zn_path(law, 12, 30);
  REQUIRE(path.size() == 13);
  for (int n : {0, 1, 5, 12}) {
    const auto single = pmf_Zn(law, n, 30);
    for (int k = 0; k <= 30; ++k) CHECK(path[n][k] == doctest::Approx(single[k]).epsilon(1e-14));
  }
}

TEST_CASE("pmf_Zn cost cap") {
  const auto law = OffspringLaw::make_builtin(Family::Poisson);
  CHECK_THROWS_AS(pmf_Zn(law, 1000, 1000, 1e6), BudgetExceeded);
  CHECK_THROWS_AS(pmf_Zn(law, 2, 0), DomainError);
}

TEST_CASE("linear fractional oracle for the law of Z(n)") {
  const auto lf = OffspringLaw::make_builtin(Family::LinearFractional);
  const auto path = pmf_Zn_path(lf, 100, 200);
  double worst = 0.0;
  for (int n = 0; n <= 100; ++n) {
    for (int k = 0; k <= 200; ++k) worst = std::max(worst, std::abs(path[n][k] - checks::lf_pmf(n, k)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("family composition equals the Taylor reference composition") {
  for (const auto& law : all_laws()) {
    INFO(law.id());
    auto g = pmf_Zn(law, 7, 60).coeffs;
    const auto fast = compose(law, g);
    const auto slow = compose_taylor(law, g);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-13);
  }
}

TEST_CASE("partitions") {
  auto p1 = enumerate_partitions(1);
  REQUIRE(p1.size() == 1);
  CHECK(p1[0] == Partition{1});

  auto p3 = enumerate_partitions(3);
  REQUIRE(p3.size() == 3);
  CHECK(p3[0] == Partition{3, 0, 0});
  CHECK(p3[1] == Partition{1, 1, 0});
  CHECK(p3[2] == Partition{0, 0, 1});

  CHECK(enumerate_partitions(5).size() == 7);
  for (int k = 1; k <= kMaxJetOrder; ++k) {
    const auto parts = enumerate_partitions(k);
    CHECK(static_cast<long long>(parts.size()) == checks::partition_count(k));
    for (const auto& p : parts) {
      int weight = 0;
      for (int r = 1; r <= k; ++r) weight += r * p[r - 1];
      CHECK(weight == k);
    }
  }
  CHECK_THROWS_AS(enumerate_partitions(0), DomainError);
}

TEST_CASE("derivative jet examples") {
  const auto lf = OffspringLaw::make_builtin(Family::LinearFractional);
  for (double q : {0.0, 0.4}) {
    const auto id = derivative_jet(lf, 0, q, 4);
    CHECK(id.values == std::vector<double>{q, 1.0, 0.0, 0.0, 0.0});
  }
  CHECK(derivative_jet(lf, 3, 2.0 / 3, 1).values[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(derivative_jet(lf, 2, 0.0, 2).values[2] == doctest::Approx(4.0 / 27).epsilon(1e-14));
  CHECK_THROWS_AS(derivative_jet(lf, 2, 1.0, 2), DomainError);
  CHECK_THROWS_AS(derivative_jet(lf, 2, 0.5, 0), DomainError);
  CHECK_THROWS_AS(derivative_jet(lf, 2, 0.5, kMaxJetOrder + 1), DomainError);
}

TEST_CASE("linear fractional jets match closed-form derivatives") {
  const auto lf = OffspringLaw::make_builtin(Family::LinearFractional);
  for (int r = 0; r <= 100; r += 7) {
    const auto jets = derivative_jet_path(lf, 100, extinction_prob(lf, r), 1);
    for (int n = 0; n <= 100; ++n)
      CHECK(std::abs(jets[n].values[1] - checks::lf_derivative_at_extinction(n, r)) < 1e-10);
  }
  for (int n : {1, 5, 30}) {
    const auto jet = derivative_jet(lf, n, 0.35, 12);
    for (int j = 1; j <= 12; ++j)
      CHECK(jet.values[j] == doctest::Approx(checks::lf_derivative(n, j, 0.35)).epsilon(1e-11));
  }
}

TEST_CASE("jet at zero agrees with series coefficients") {
  for (const auto& law : all_laws()) {
    INFO(law.id());
    for (int n : {1, 3, 10, 25}) {
      const auto jet = derivative_jet(law, n, 0.0, 15);
      const auto series = pmf_Zn(law, n, 15);
      for (int j = 0; j <= 15; ++j) {
        const double expect = std::tgamma(j + 1.0) * series[j];
        CHECK(std::abs(jet.values[j] - expect) <= 1e-10 * std::max(1.0, expect));
      }
    }
  }
}

TEST_CASE("jet invariants") {
  for (const auto& law : all_laws()) {
    for (double q : {0.0, 0.5, 0.99}) {
      const auto jet = derivative_jet(law, 50, q, 10);
      CHECK(jet.values[0] >= q);
      CHECK(jet.values[0] < 1.0);
      for (double v : jet.values) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("jet overflow is reported") {
  // f_n^{(20)}(q) ~ 20! (Bn)^19 / (1 + Bn(1-q))^21 leaves the double range
  const auto lf = OffspringLaw::parse("linear_fractional:1e16");
  CHECK_THROWS_AS(derivative_jet(lf, 2000, 1.0 - 0x1p-52, 20), JetOverflow);
  CHECK_NOTHROW(derivative_jet(lf, 2000, 1.0 - 0x1p-52, 4));
}

TEST_CASE("truncated product: parallel equals serial reference") {
  const int before = worker_count();
  Rng rng(3, 0);
  for (int size : {1, 7, 255, 256, 1000, 4096}) {
    std::vector<double> a(size), b(size / 2 + 1), p(size), s(size);
    for (double& v : a) v = rng.uniform();
    for (double& v : b) v = rng.uniform();
    for (int threads : {1, 3}) {
      set_worker_count(threads);
      kernels::truncated_product(a, b, p);
      kernels::truncated_product_serial(a, b, s);
      CHECK(p == s);
    }
    // definition check
    double c = 0.0;
    const int k = size - 1;
    for (int i = 0; i <= k; ++i)
      if (k - i < static_cast<int>(b.size())) c += a[i] * b[k - i];
    CHECK(s[k] == doctest::Approx(c).epsilon(1e-12));
  }
  set_worker_count(before);
}

TEST_CASE("clamp_rounding") {
  std::vector<double> v = {-1e-15, -1e-13, 0.5, -0.0};
  kernels::clamp_rounding(v);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == -1e-13);
  CHECK(v[2] == 0.5);
}
