#include "gwr/series.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gwr/errors.hpp"
#include "gwr/kernels.hpp"

namespace gwr {

namespace {

void check_budget(int n, int K, double cost_cap) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  if (K < 1) throw DomainError("truncation degree must be at least 1");
  double cost = static_cast<double>(n) * static_cast<double>(K) * static_cast<double>(K);
  if (cost > cost_cap) {
    throw BudgetExceeded("pmf_Zn cost n*K^2 = " + std::to_string(cost) + " exceeds cap " + std::to_string(cost_cap));
  }
}

TruncatedSeries finish(std::vector<double> coeffs) {
  kernels::clamp_rounding(coeffs);
  TruncatedSeries s;
  s.K = static_cast<int>(coeffs.size()) - 1;
  double total = std::accumulate(coeffs.begin(), coeffs.end(), 0.0);
  s.tail = std::max(0.0, 1.0 - total);
  s.coeffs = std::move(coeffs);
  return s;
}

std::vector<double> identity_series(int K) {
  std::vector<double> g(static_cast<std::size_t>(K) + 1, 0.0);
  g[1] = 1.0;
  return g;
}

}  // namespace

std::vector<double> survival_probs(const OffspringLaw& law, int n) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  std::vector<double> Q(static_cast<std::size_t>(n) + 1);
  Q[0] = 1.0;
  for (int m = 0; m < n; ++m) Q[m + 1] = law.one_minus_pgf(Q[m]);
  return Q;
}

double survival_prob(const OffspringLaw& law, int n) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  double Q = 1.0;
  for (int m = 0; m < n; ++m) Q = law.one_minus_pgf(Q);
  return Q;
}

double extinction_prob(const OffspringLaw& law, int n) { return 1.0 - survival_prob(law, n); }

std::vector<double> compose(const OffspringLaw& law, const std::vector<double>& inner) {
  const std::size_t size = inner.size();
  const double q = inner[0];
  std::vector<double> out(size, 0.0);
  switch (law.family()) {
    case Family::LinearFractional: {
      // f(q+h) = f(q) + (1/(B u0)) (1/(1 - rho h) - 1), u0 = 1 + B(1-q), rho = B/u0
      const double B = law.B();
      const double u0 = 1.0 + B * (1.0 - q);
      const double rho = B / u0;
      std::vector<double> r(size, 0.0);
      r[0] = 1.0;
      for (std::size_t k = 1; k < size; ++k) {
        double acc = 0.0;
        const double* ph = inner.data();
        const double* pr = r.data();
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 1; i <= k; ++i) acc += ph[i] * pr[k - i];
        r[k] = rho * acc;
      }
      out[0] = law.pgf(q);
      for (std::size_t k = 1; k < size; ++k) out[k] = r[k] / (B * u0);
      break;
    }
    case Family::Poisson: {
      // f(q+h) = e^{q-1} exp(h); k E_k = sum_i i h_i E_{k-i}
      std::vector<double> weighted(size, 0.0);
      for (std::size_t i = 1; i < size; ++i) weighted[i] = static_cast<double>(i) * inner[i];
      std::vector<double> e(size, 0.0);
      e[0] = 1.0;
      for (std::size_t k = 1; k < size; ++k) {
        double acc = 0.0;
        const double* pw = weighted.data();
        const double* pe = e.data();
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 1; i <= k; ++i) acc += pw[i] * pe[k - i];
        e[k] = acc / static_cast<double>(k);
      }
      const double scale = std::exp(q - 1.0);
      for (std::size_t k = 0; k < size; ++k) out[k] = scale * e[k];
      break;
    }
    default:
      return compose_taylor(law, inner);
  }
  kernels::clamp_rounding(out);
  return out;
}

std::vector<double> compose_taylor(const OffspringLaw& law, const std::vector<double>& inner) {
  const std::size_t size = inner.size();
  const int K = static_cast<int>(size) - 1;
  const double q = inner[0];
  const int J = law.finite_support() ? std::min(law.max_support(), K) : K;

  std::vector<double> taylor = law.pgf_derivatives(q, J);
  double factorial = 1.0;
  for (int j = 1; j <= J; ++j) {
    factorial *= j;
    taylor[j] /= factorial;
  }

  std::vector<double> h = inner;
  h[0] = 0.0;
  std::vector<double> acc(size, 0.0), next(size, 0.0);
  acc[0] = taylor[J];
  for (int j = J - 1; j >= 0; --j) {
    kernels::truncated_product(h, acc, next);
    next[0] += taylor[j];
    acc.swap(next);
  }
  kernels::clamp_rounding(acc);
  return acc;
}

TruncatedSeries pmf_Zn(const OffspringLaw& law, int n, int K, double cost_cap) {
  check_budget(n, K, cost_cap);
  std::vector<double> g = identity_series(K);
  for (int step = 0; step < n; ++step) g = compose(law, g);
  return finish(std::move(g));
}

std::vector<TruncatedSeries> pmf_Zn_path(const OffspringLaw& law, int n, int K, double cost_cap) {
  check_budget(n, K, cost_cap);
  std::vector<TruncatedSeries> path;
  path.reserve(static_cast<std::size_t>(n) + 1);
  std::vector<double> g = identity_series(K);
  path.push_back(finish(g));
  for (int step = 0; step < n; ++step) {
    g = compose(law, g);
    path.push_back(finish(g));
  }
  return path;
}

}  // namespace gwr
