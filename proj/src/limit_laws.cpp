#include "gwr/limit_laws.hpp"

#include <cmath>
#include <string>

#include "gwr/errors.hpp"

namespace gwr::limits {

namespace {

constexpr int kSeriesHardCap = 100000;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

// e^{-u} sum_{i >= j} u^i / i!, all terms positive.
double upper_poisson_tail(int j, double u) {
  double term = std::exp(-u + j * std::log(u) - std::lgamma(j + 1.0));
  double acc = 0.0;
  for (int i = j; i < j + kSeriesHardCap; ++i) {
    acc += term;
    term *= u / (i + 1);
    if (term < 1e-17 * acc) break;
  }
  return acc;
}

template <class Pmf>
std::vector<double> series(Pmf pmf, int j_max) {
  std::vector<double> out;
  double acc = 0.0;
  for (int j = 1; j_max <= 0 || j <= j_max; ++j) {
    double v = pmf(j);
    out.push_back(v);
    acc += v;
    // past the mode the terms decay factorially
    if (j_max <= 0 && j > 1 && v < 1e-16 * acc && v <= out[out.size() - 2]) break;
    if (j >= kSeriesHardCap) break;
  }
  return out;
}

}  // namespace

double gamma_reg_int(int j, double u) {
  require(j >= 1, "incomplete gamma needs integer shape j >= 1");
  require(u >= 0.0, "incomplete gamma needs u >= 0");
  if (u == 0.0) return 0.0;
  if (std::isinf(u)) return 1.0;
  if (j - 1 > u) return upper_poisson_tail(j, u);
  // 1 - e^{-u} sum_{i<j} u^i / i!, summed downward from the largest term
  double term = std::exp(-u + (j - 1) * std::log(u) - std::lgamma(static_cast<double>(j)));
  double partial = 0.0;
  for (int i = j - 1; i >= 0; --i) {
    partial += term;
    term *= i / u;
    if (term < 1e-17 * partial) break;
  }
  return 1.0 - partial;
}

double gf_small_phi(double s, double x) {
  require(s >= 0.0 && s <= 1.0, "s must lie in [0,1]");
  require(x > 0.0, "x must be positive");
  if (s == 1.0) return 1.0;
  const double w = 1.0 - s;
  return s * x * -std::expm1(-w / x) / w;
}

double reduced_small_pmf(double x, int j) {
  require(x > 0.0, "x must be positive");
  require(j >= 1, "j must be at least 1");
  return x * gamma_reg_int(j, 1.0 / x);
}

double mrca_cdf_small_phi(double x) {
  require(x > 0.0, "x must be positive");
  return x * -std::expm1(-1.0 / x);
}

double gf_linear_band(double s, double t, double a) {
  require(s >= 0.0 && s <= 1.0, "s must lie in [0,1]");
  require(t >= 0.0 && t < 1.0, "t must lie in [0,1)");
  require(a > 0.0, "a must be positive");
  if (s == 1.0) return 1.0;
  const double w = 1.0 - t * s;
  return s * (1.0 - t) / w * std::expm1(-w * a / (1.0 - t)) / std::expm1(-a);
}

double band_pmf(double t, double a, int j) {
  require(t >= 0.0 && t < 1.0, "t must lie in [0,1)");
  require(a > 0.0, "a must be positive");
  require(j >= 1, "j must be at least 1");
  const double power = j == 1 ? 1.0 : std::pow(t, j - 1);
  return (1.0 - t) / -std::expm1(-a) * power * gamma_reg_int(j, a / (1.0 - t));
}

double mrca_cdf_band(double t, double a) {
  require(t > 0.0 && t <= 1.0, "t must lie in (0,1]");
  require(a > 0.0, "a must be positive");
  if (t == 1.0) return 1.0;
  return t * std::expm1(-a / t) / std::expm1(-a);
}

double yaglom_cdf(double y) {
  require(y >= 0.0, "y must be nonnegative");
  return -std::expm1(-y);
}

double classical_reduced_gf(double s, double t) {
  require(s >= 0.0 && s <= 1.0, "s must lie in [0,1]");
  require(t >= 0.0 && t < 1.0, "t must lie in [0,1)");
  return s * (1.0 - t) / (1.0 - t * s);
}

std::vector<double> reduced_small_pmf_series(double x, int j_max) {
  return series([x](int j) { return reduced_small_pmf(x, j); }, j_max);
}

std::vector<double> band_pmf_series(double t, double a, int j_max) {
  return series([t, a](int j) { return band_pmf(t, a, j); }, j_max);
}

}  // namespace gwr::limits
