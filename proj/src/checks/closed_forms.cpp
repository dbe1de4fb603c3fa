#include "checks/closed_forms.hpp"

#include <cmath>

#include "gwr/series.hpp"

namespace gwr::checks {

double lf_extinction(int n) { return static_cast<double>(n) / (n + 1.0); }

double lf_pmf(int n, int k) {
  if (k == 0) return lf_extinction(n);
  if (n == 0) return k == 1 ? 1.0 : 0.0;
  const double r = n + 1.0;
  return std::pow(n / r, k - 1) / (r * r);
}

double lf_derivative(int n, int j, double s) {
  double fact = 1.0;
  for (int i = 2; i <= j; ++i) fact *= i;
  return fact * std::pow(static_cast<double>(n), j - 1) / std::pow(n + 1.0 - n * s, j + 1);
}

double lf_derivative_at_extinction(int n, int r) {
  const double a = r + 1.0;
  const double b = n + r + 1.0;
  return (a * a) / (b * b);
}

long long partition_count(int k) {
  std::vector<long long> p(static_cast<std::size_t>(k) + 1, 0);
  p[0] = 1;
  for (int i = 1; i <= k; ++i) {
    long long acc = 0;
    for (int s = 1;; ++s) {
      const int g1 = s * (3 * s - 1) / 2;
      const int g2 = s * (3 * s + 1) / 2;
      if (g1 > i) break;
      const long long sign = (s % 2) ? 1 : -1;
      acc += sign * p[i - g1];
      if (g2 <= i) acc += sign * p[i - g2];
    }
    p[i] = acc;
  }
  return p[k];
}

std::vector<double> reduced_pmf_by_thinning(const OffspringLaw& law, int m, int n, int J, int K) {
  TruncatedSeries zm = pmf_Zn(law, m, K);
  std::vector<double> out(static_cast<std::size_t>(J), 0.0);
  if (m == n) {
    for (int j = 1; j <= std::min(J, K); ++j) out[j - 1] = zm.coeffs[j];
    return out;
  }
  const double Q = survival_prob(law, n - m);
  for (int k = 1; k <= K; ++k) {
    // binomial(k, Q) pmf at j, via logs
    for (int j = 1; j <= std::min(J, k); ++j) {
      const double log_choose = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
      const double log_term = log_choose + j * std::log(Q) + (k - j) * std::log1p(-Q);
      out[j - 1] += zm.coeffs[k] * std::exp(log_term);
    }
  }
  return out;
}

}  // namespace gwr::checks
