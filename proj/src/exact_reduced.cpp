#include "gwr/exact_reduced.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gwr/errors.hpp"
#include "gwr/jet.hpp"
#include "gwr/kernels.hpp"

namespace gwr {

namespace {

void check_generations(int m, int n) {
  if (n < 0 || m < 0 || m > n) throw DomainError("need 0 <= m <= n");
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ReducedLawTable checked(ReducedLawTable t) {
  verify_table(t);
  return t;
}

}  // namespace

void verify_table(const ReducedLawTable& t) {
  constexpr double kSlack = 1e-9;
  std::string problem;
  const double total = t.kind == ReducedLawTable::Kind::Conditional ? 1.0 : t.event_prob;
  for (int j = 1; j <= t.j_max() && problem.empty(); ++j) {
    const double p = t.p(j);
    if (!std::isfinite(p) || p < -kSlack || p > 1.0 + kSlack) problem = "entry j=" + std::to_string(j) + " outside [0,1]";
  }
  if (problem.empty() && !(t.event_prob >= -kSlack && t.event_prob <= 1.0 + kSlack)) problem = "event probability outside [0,1]";
  if (problem.empty() && t.mass_accounted > total * (1.0 + kSlack) + 1e-15) problem = "table mass exceeds its event probability";
  if (problem.empty()) return;

  std::ostringstream dump;
  dump.precision(17);
  dump << "law=" << t.law << " kind=" << kind_name(t.kind) << " n=" << t.n << " m=" << t.m;
  if (t.bound) dump << " C=" << *t.bound;
  dump << " event_prob=" << t.event_prob << " mass=" << t.mass_accounted << "\npmf:";
  for (double p : t.pmf) dump << ' ' << p;
  throw InvariantViolation("reduced law table: " + problem, dump.str());
}

std::string_view kind_name(ReducedLawTable::Kind kind) {
  switch (kind) {
    case ReducedLawTable::Kind::Unconditional: return "unconditional";
    case ReducedLawTable::Kind::Joint: return "joint";
    case ReducedLawTable::Kind::Conditional: return "conditional";
  }
  return "unknown";
}

ReducedLawTable reduced_pmf(const OffspringLaw& law, int m, int n, int J_max) {
  check_generations(m, n);
  if (J_max < 1) throw DomainError("J_max must be at least 1");

  ReducedLawTable t;
  t.law = law.id();
  t.m = m;
  t.n = n;
  t.kind = ReducedLawTable::Kind::Unconditional;
  t.pmf.assign(static_cast<std::size_t>(J_max), 0.0);
  t.event_prob = survival_prob(law, n);

  if (m == n) {
    TruncatedSeries zn = pmf_Zn(law, n, J_max);
    for (int j = 1; j <= J_max; ++j) t.pmf[j - 1] = zn[j];
  } else if (m == 0) {
    t.pmf[0] = t.event_prob;
  } else {
    if (J_max > kMaxJetOrder) throw DomainError("J_max above the Faa di Bruno cap of 20");
    const int r = n - m;
    const double Q = survival_prob(law, r);
    DerivativeJet jet = derivative_jet(law, m, 1.0 - Q, J_max);
    double scale = 1.0;  // Q^j / j!
    for (int j = 1; j <= J_max; ++j) {
      scale *= Q / j;
      t.pmf[j - 1] = scale * jet.values[j];
    }
  }
  t.mass_accounted = sum(t.pmf);
  return checked(std::move(t));
}

TruncatedSeries conditioned_positive_pmf(const OffspringLaw& law, int r, int K) {
  if (r < 1) throw DomainError("conditioning on survival needs r >= 1");
  TruncatedSeries s = pmf_Zn(law, r, K);
  const double Q = survival_prob(law, r);
  s.coeffs[0] = 0.0;
  for (int k = 1; k <= s.K; ++k) s.coeffs[k] /= Q;
  s.tail = std::max(0.0, 1.0 - sum(s.coeffs));
  return s;
}

double event_H_prob(const OffspringLaw& law, int n, int C) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  if (C < 0) throw DomainError("bound must be nonnegative");
  if (C == 0) return 0.0;
  TruncatedSeries s = pmf_Zn(law, n, C);
  double acc = 0.0;
  for (int k = 1; k <= C; ++k) acc += s.coeffs[k];
  return acc;
}

ReducedLawTable joint_reduced_bounded(const OffspringLaw& law, int m, int n, int C, int J_max, double epsilon) {
  check_generations(m, n);
  if (C < 1) throw DomainError("bound C must be at least 1");
  if (J_max < 0) throw DomainError("J_max must be nonnegative");
  const bool automatic = J_max == 0;

  ReducedLawTable t;
  if (m == n) {
    // Z(n,n) = Z(n): the bound acts directly on j.
    int J = automatic ? C : J_max;
    t = reduced_pmf(law, m, n, J);
    for (int j = C + 1; j <= J; ++j) t.pmf[j - 1] = 0.0;
  } else {
    const int cap = std::min(kMaxJetOrder, C);
    int J = automatic ? cap : J_max;
    if (J > kMaxJetOrder) throw DomainError("J_max above the Faa di Bruno cap of 20");
    t = reduced_pmf(law, m, n, J);

    // S_j <= C needs every one of j positive summands, so only j <= C survive.
    TruncatedSeries positive = conditioned_positive_pmf(law, n - m, C);
    std::vector<double> sum_law = positive.coeffs;
    std::vector<double> next(sum_law.size());
    for (int j = 1; j <= J; ++j) {
      if (j > C) {
        t.pmf[j - 1] = 0.0;
        continue;
      }
      t.pmf[j - 1] *= std::min(1.0, sum(sum_law));
      if (j < J) {
        kernels::truncated_product(sum_law, positive.coeffs, next);
        sum_law.swap(next);
      }
    }
  }

  t.kind = ReducedLawTable::Kind::Joint;
  t.bound = C;
  t.epsilon = epsilon;
  t.event_prob = event_H_prob(law, n, C);

  if (automatic) {
    const double target = (1.0 - epsilon) * t.event_prob;
    double acc = 0.0;
    std::size_t keep = t.pmf.size();
    for (std::size_t j = 0; j < t.pmf.size(); ++j) {
      acc += t.pmf[j];
      if (acc >= target) {
        keep = j + 1;
        break;
      }
    }
    t.pmf.resize(keep);
  }
  t.mass_accounted = sum(t.pmf);
  return checked(std::move(t));
}

ReducedLawTable conditional_reduced_pmf(const OffspringLaw& law, int m, int n, int C, int J_max, double epsilon) {
  ReducedLawTable t = joint_reduced_bounded(law, m, n, C, J_max, epsilon);
  if (!(t.event_prob > 0.0)) {
    throw ConditioningImpossible("P(0 < Z(n) <= C) is zero for n=" + std::to_string(n) + ", C=" + std::to_string(C));
  }
  for (double& p : t.pmf) p /= t.event_prob;
  t.kind = ReducedLawTable::Kind::Conditional;
  t.mass_accounted = sum(t.pmf);
  return checked(std::move(t));
}

std::vector<double> mrca_distance_cdf(const OffspringLaw& law, int n, int C, const std::vector<int>& grid) {
  if (n < 1) throw DomainError("mrca distance needs n >= 1");
  if (C < 1) throw DomainError("bound C must be at least 1");
  for (int u : grid) {
    if (u < 0 || u > n) throw DomainError("mrca grid points must lie in [0, n]");
  }

  // P(0 < Z(u) <= C) and P(Z(u) = 1) for every u <= n from one series pass.
  std::vector<TruncatedSeries> path = pmf_Zn_path(law, n, C);
  std::vector<double> Q = survival_probs(law, n);
  auto bounded = [&](int u) {
    double acc = 0.0;
    for (int k = 1; k <= C; ++k) acc += path[u].coeffs[k];
    return acc;
  };
  const double H = bounded(n);
  if (!(H > 0.0)) throw ConditioningImpossible("P(0 < Z(n) <= C) is zero");

  std::vector<double> out;
  out.reserve(grid.size());
  for (int u : grid) {
    double joint_single;
    if (u == 0) {
      joint_single = path[n].coeffs[1];
    } else if (u == n) {
      joint_single = H;
    } else {
      // P(Z(n-u,n)=1, 0<Z(n)<=C) = f_{n-u}'(q_u) * P(0 < Z(u) <= C)
      DerivativeJet jet = derivative_jet(law, n - u, 1.0 - Q[u], 1);
      joint_single = jet.values[1] * bounded(u);
    }
    out.push_back(joint_single / H);
  }
  return out;
}

}  // namespace gwr
