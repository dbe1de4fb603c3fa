#pragma once

#include <cstdint>
#include <vector>

#include "gwr/offspring_law.hpp"

namespace gwr {

// Coefficients c_0..c_K of a probability generating function, here the law of
// Z(n): c_k = P(Z(n) = k). tail = 1 - sum c_k is the mass beyond degree K.
struct TruncatedSeries {
  std::vector<double> coeffs;
  int K = 0;
  double tail = 0.0;

  double operator[](int k) const { return k <= K ? coeffs[k] : 0.0; }
};

// Default cap on n * K^2 for pmf_Zn.
inline constexpr double kDefaultSeriesCostCap = 2.0e10;

// Q(n) = P(Z(n) > 0), iterated as Q_{m+1} = 1 - f(1 - Q_m) from Q_0 = 1.
double survival_prob(const OffspringLaw& law, int n);
// All of Q(0..n).
std::vector<double> survival_probs(const OffspringLaw& law, int n);

// q_n = f_n(0) = P(Z(n) = 0).
double extinction_prob(const OffspringLaw& law, int n);

// Exact law of Z(n) up to degree K, by composing f onto f_{n-1}.
TruncatedSeries pmf_Zn(const OffspringLaw& law, int n, int K, double cost_cap = kDefaultSeriesCostCap);

// Laws of Z(0..n) truncated at K, one series per generation.
std::vector<TruncatedSeries> pmf_Zn_path(const OffspringLaw& law, int n, int K,
                                         double cost_cap = kDefaultSeriesCostCap);

// One composition step: coefficients of f(g(s)) truncated at g.size()-1.
// Uses the family's closed-form composition.
std::vector<double> compose(const OffspringLaw& law, const std::vector<double>& inner);

// Reference composition: f(q + h) = sum_j f^{(j)}(q)/j! h^j with h = g - g(0),
// Horner in h. O(K^3) for infinite-support laws; kept for testing.
std::vector<double> compose_taylor(const OffspringLaw& law, const std::vector<double>& inner);

}  // namespace gwr
