#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "gwr/errors.hpp"
#include "gwr/limit_laws.hpp"
#include "gwr/stats.hpp"

using namespace gwr;
namespace L = gwr::limits;

TEST_CASE("incomplete gamma with integer shape") {
  for (int j : {1, 2, 3, 7, 20, 60, 150}) {
    for (double u : {0.0, 1e-8, 0.01, 0.5, 1.0, 3.0, 10.0, 50.0, 200.0}) {
      const double expect = boost::math::gamma_p(static_cast<double>(j), u);
      INFO("j=" << j << " u=" << u);
      CHECK(std::abs(L::gamma_reg_int(j, u) - expect) <= 1e-13 + 1e-12 * expect);
    }
  }
  CHECK(L::gamma_reg_int(1, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(L::gamma_reg_int(5, 0.0) == 0.0);
  CHECK_THROWS_AS(L::gamma_reg_int(0, 1.0), DomainError);
  CHECK_THROWS_AS(L::gamma_reg_int(2, -1.0), DomainError);
}

TEST_CASE("small-phi limit examples") {
  for (double x : {0.1, 1.0, 7.0}) {
    CHECK(L::gf_small_phi(1.0, x) == 1.0);
    CHECK(L::gf_small_phi(0.0, x) == 0.0);
  }
  CHECK(L::gf_small_phi(0.5, 1.0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-14));
  CHECK(L::gf_small_phi(1.0 - 1e-12, 2.0) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK(L::reduced_small_pmf(1.0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(L::reduced_small_pmf(1e6, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(L::mrca_cdf_small_phi(1.0) == doctest::Approx(0.632121).epsilon(1e-6));
  CHECK(L::mrca_cdf_small_phi(1e-3) / 1e-3 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(L::mrca_cdf_small_phi(1e8) == doctest::Approx(1.0).epsilon(1e-8));
  for (double x : {0.2, 1.0, 5.0}) CHECK(L::mrca_cdf_small_phi(x) == doctest::Approx(L::reduced_small_pmf(x, 1)).epsilon(1e-15));

  CHECK_THROWS_AS(L::gf_small_phi(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(L::gf_small_phi(1.5, 1.0), DomainError);
  CHECK_THROWS_AS(L::reduced_small_pmf(1.0, 0), DomainError);
}

TEST_CASE("small-phi pmf sums to one") {
  for (double x : {0.05, 0.25, 1.0, 4.0, 50.0}) {
    const auto pmf = L::reduced_small_pmf_series(x);
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (double p : pmf) CHECK(p >= 0.0);
  }
  CHECK(L::reduced_small_pmf_series(1.0, 10).size() == 10);
}

TEST_CASE("band limit examples") {
  for (double t : {0.0, 0.3, 0.9}) {
    for (double a : {0.5, 3.0}) CHECK(L::gf_linear_band(1.0, t, a) == doctest::Approx(1.0).epsilon(1e-15));
  }
  for (double s : {0.0, 0.4, 1.0}) CHECK(L::gf_linear_band(s, 0.0, 2.0) == doctest::Approx(s).epsilon(1e-15));
  for (double t : {0.1, 0.5, 0.99}) {
    for (double a : {0.5, 2.0}) {
      const double j1 = (1.0 - t) * (1.0 - std::exp(-a / (1.0 - t))) / (1.0 - std::exp(-a));
      CHECK(L::band_pmf(t, a, 1) == doctest::Approx(j1).epsilon(1e-14));
      CHECK(L::band_pmf(t, a, 1) == doctest::Approx(L::mrca_cdf_band(1.0 - t, a)).epsilon(1e-14));
    }
  }
  CHECK(L::band_pmf(0.0, 1.0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(L::band_pmf(0.0, 1.0, 2) == 0.0);
  CHECK(L::mrca_cdf_band(1.0, 2.0) == 1.0);
  CHECK(L::mrca_cdf_band(0.5, 1.0) == doctest::Approx(0.683940).epsilon(1e-6));
  CHECK(L::mrca_cdf_band(0.5, 50.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(L::gf_linear_band(0.5, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(L::gf_linear_band(0.5, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(L::mrca_cdf_band(0.0, 1.0), DomainError);
}

TEST_CASE("band mrca cdf against the integral of the j=1 relation") {
  // d/dt [t (1 - e^{-a/t})] integrated numerically from 0 recovers the cdf
  const double a = 1.0, t = 0.5;
  const int steps = 200000;
  double integral = 0.0;
  auto deriv = [&](double u) { return (1.0 - std::exp(-a / u)) - (a / u) * std::exp(-a / u); };
  for (int i = 0; i < steps; ++i) {
    const double u = t * (i + 0.5) / steps;
    integral += deriv(u) * t / steps;
  }
  CHECK(integral / (1.0 - std::exp(-a)) == doctest::Approx(L::mrca_cdf_band(t, a)).epsilon(1e-8));
}

TEST_CASE("band pmf sums to one") {
  for (double t : {0.0, 0.2, 0.5, 0.8, 0.99}) {
    for (double a : {0.5, 1.0, 2.0, 20.0}) {
      const auto pmf = L::band_pmf_series(t, a);
      CHECK(std::abs(std::accumulate(pmf.begin(), pmf.end(), 0.0) - 1.0) < 1e-12);
      for (double p : pmf) CHECK(p >= 0.0);
    }
  }
}

TEST_CASE("gf and pmf duality") {
  for (int i = 1; i <= 9; ++i) {
    const double s = i / 10.0;
    for (double x : {0.25, 1.0, 4.0})
      CHECK(std::abs(stats::table_gf(L::reduced_small_pmf_series(x), s) - L::gf_small_phi(s, x)) < 1e-10);
    for (double t : {0.2, 0.5, 0.8}) {
      for (double a : {0.5, 1.0, 2.0})
        CHECK(std::abs(stats::table_gf(L::band_pmf_series(t, a), s) - L::gf_linear_band(s, t, a)) < 1e-10);
    }
  }
}

TEST_CASE("large a recovers the classical reduced law, monotonically") {
  const double a_grid[] = {0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  for (int i = 1; i <= 9; ++i) {
    for (int k = 1; k <= 9; ++k) {
      const double s = i / 10.0, t = k / 10.0;
      CHECK(std::abs(L::gf_linear_band(s, t, 50.0) - L::classical_reduced_gf(s, t)) < 1e-10);
      double prev = 2.0;
      for (double a : a_grid) {
        const double v = L::gf_linear_band(s, t, a);
        CHECK(v <= prev);
        CHECK(v >= L::classical_reduced_gf(s, t) - 1e-15);
        prev = v;
      }
    }
  }
}

TEST_CASE("gf values lie in [0,1]") {
  for (int i = 0; i <= 20; ++i) {
    const double s = i / 20.0;
    for (double x : {0.01, 1.0, 100.0}) {
      const double v = L::gf_small_phi(s, x);
      CHECK((v >= 0.0 && v <= 1.0));
    }
    for (double t : {0.0, 0.5, 0.999}) {
      for (double a : {0.01, 1.0, 700.0}) {
        const double v = L::gf_linear_band(s, t, a);
        CHECK((v >= 0.0 && v <= 1.0 + 1e-15));
      }
    }
  }
}

TEST_CASE("classical law and Yaglom cdf") {
  CHECK(L::yaglom_cdf(0.0) == 0.0);
  CHECK(L::yaglom_cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(L::classical_reduced_gf(1.0, 0.7) == 1.0);
  CHECK(L::classical_reduced_gf(0.3, 0.0) == doctest::Approx(0.3).epsilon(1e-15));
}
