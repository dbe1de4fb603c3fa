#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwr/offspring_law.hpp"
#include "gwr/series.hpp"

namespace gwr {

inline constexpr double kDefaultTableEpsilon = 1e-9;

// Exact law of the reduced count Z(m,n) over j = 1..pmf.size().
//
// Three flavours share this type:
//   unconditional  p_j = P(Z(m,n) = j)                  sums to P(Z(n) > 0)
//   joint          p_j = P(Z(m,n) = j, 0 < Z(n) <= C)   sums to P(H)
//   conditional    p_j = P(Z(m,n) = j | 0 < Z(n) <= C)  sums to 1
struct ReducedLawTable {
  enum class Kind { Unconditional, Joint, Conditional };

  std::string law;
  int n = 0;
  int m = 0;
  std::optional<int> bound;
  Kind kind = Kind::Unconditional;
  double epsilon = kDefaultTableEpsilon;
  std::vector<double> pmf;  // pmf[j-1] = p_j
  double mass_accounted = 0.0;
  // Probability of the event the table lives on: P(Z(n)>0) or P(0<Z(n)<=C).
  double event_prob = 0.0;

  int j_max() const { return static_cast<int>(pmf.size()); }
  double p(int j) const { return j >= 1 && j <= j_max() ? pmf[j - 1] : 0.0; }
};

std::string_view kind_name(ReducedLawTable::Kind kind);

// p_j = Q(n-m)^j / j! * f_m^{(j)}(q_{n-m}), j = 1..J_max (J_max <= 20 unless m == n).
ReducedLawTable reduced_pmf(const OffspringLaw& law, int m, int n, int J_max);

// Law of Z(r) given Z(r) > 0, coefficients 0..K (coeffs[0] = 0).
TruncatedSeries conditioned_positive_pmf(const OffspringLaw& law, int r, int K);

// P(Z(m,n) = j, 0 < Z(n) <= C) = P(Z(m,n) = j) * P(S_j <= C), S_j a sum of j
// independent copies of Z(n-m) given survival. J_max = 0 selects the smallest
// J whose accumulated mass reaches (1 - epsilon) * P(0 < Z(n) <= C), capped at 20.
ReducedLawTable joint_reduced_bounded(const OffspringLaw& law, int m, int n, int C, int J_max = 0,
                                      double epsilon = kDefaultTableEpsilon);

// P(0 < Z(n) <= C) by direct iteration of the pgf series.
double event_H_prob(const OffspringLaw& law, int n, int C);

// joint_reduced_bounded normalized by event_H_prob.
ReducedLawTable conditional_reduced_pmf(const OffspringLaw& law, int m, int n, int C, int J_max = 0,
                                        double epsilon = kDefaultTableEpsilon);

// Throws InvariantViolation (with a dump of the table) when an entry leaves
// [0,1] or the mass exceeds the table's event probability.
void verify_table(const ReducedLawTable& table);

// For each u in grid: P(Z(n-u, n) = 1 | 0 < Z(n) <= C), which is P(d(n) <= u | .)
// for u >= 1.
std::vector<double> mrca_distance_cdf(const OffspringLaw& law, int n, int C, const std::vector<int>& grid);

}  // namespace gwr
