#include "gwr/jet.hpp"

#include <array>
#include <cmath>
#include <string>

#include "gwr/errors.hpp"

namespace gwr {

namespace {

void enumerate_into(int k, int r, int remaining, Partition& current, std::vector<Partition>& out) {
  if (r > k) {
    if (remaining == 0) out.push_back(current);
    return;
  }
  for (int i = remaining / r; i >= 0; --i) {
    current[r - 1] = i;
    enumerate_into(k, r + 1, remaining - i * r, current, out);
  }
  current[r - 1] = 0;
}

// One term of Faa di Bruno's formula for order k:
//   k! / prod_r (i_r! (r!)^{i_r}) * F^{(I)} * prod_r (G^{(r)})^{i_r}
struct FaaTerm {
  int outer_order = 0;  // I = sum i_r
  double coefficient = 0.0;
  std::vector<std::pair<int, int>> factors;  // (r, i_r) with i_r > 0
};

using FaaTable = std::array<std::vector<FaaTerm>, kMaxJetOrder + 1>;

const FaaTable& faa_table() {
  static const FaaTable table = [] {
    FaaTable t;
    std::array<double, kMaxJetOrder + 1> fact{};
    fact[0] = 1.0;
    for (int i = 1; i <= kMaxJetOrder; ++i) fact[i] = fact[i - 1] * i;
    for (int k = 1; k <= kMaxJetOrder; ++k) {
      for (const Partition& p : enumerate_partitions(k)) {
        FaaTerm term;
        double denom = 1.0;
        for (int r = 1; r <= k; ++r) {
          int i = p[r - 1];
          if (i == 0) continue;
          term.outer_order += i;
          denom *= fact[i] * std::pow(fact[r], i);
          term.factors.emplace_back(r, i);
        }
        term.coefficient = fact[k] / denom;
        t[k].push_back(std::move(term));
      }
    }
    return t;
  }();
  return table;
}

void check_args(int n, double q, int J) {
  if (n < 0) throw DomainError("generation must be nonnegative");
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("jet point must lie in [0,1)");
  if (J < 1 || J > kMaxJetOrder) {
    throw DomainError("jet order must be in [1, " + std::to_string(kMaxJetOrder) + "]");
  }
}

class JetStepper {
 public:
  JetStepper(const OffspringLaw& law, double q, int J)
      : law_(law), J_(J), values_(J + 1, 0.0), next_(J + 1), outer_(J + 1), powers_(J + 1) {
    values_[0] = q;
    values_[1] = 1.0;
    survival_ = 1.0 - q;
    for (int r = 1; r <= J; ++r) powers_[r].assign(J / r + 1, 1.0);
  }

  void step(int generation) {
    const auto& table = faa_table();
    law_.pgf_derivatives_at_survival(survival_, outer_);
    for (int r = 1; r <= J_; ++r) {
      auto& pw = powers_[r];
      for (std::size_t i = 1; i < pw.size(); ++i) pw[i] = pw[i - 1] * values_[r];
    }
    survival_ = law_.one_minus_pgf(survival_);
    next_[0] = 1.0 - survival_;
    for (int k = 1; k <= J_; ++k) {
      double acc = 0.0;
      for (const FaaTerm& term : table[k]) {
        double prod = term.coefficient * outer_[term.outer_order];
        for (auto [r, i] : term.factors) prod *= powers_[r][i];
        acc += prod;
      }
      if (!std::isfinite(acc)) {
        throw JetOverflow("derivative of order " + std::to_string(k) + " overflowed at generation " +
                          std::to_string(generation));
      }
      next_[k] = acc;
    }
    values_.swap(next_);
  }

  const std::vector<double>& values() const { return values_; }

 private:
  const OffspringLaw& law_;
  int J_;
  std::vector<double> values_, next_, outer_;
  std::vector<std::vector<double>> powers_;
  double survival_;
};

}  // namespace

std::vector<Partition> enumerate_partitions(int k) {
  if (k < 1) throw DomainError("partition order must be at least 1");
  std::vector<Partition> out;
  Partition current(static_cast<std::size_t>(k), 0);
  enumerate_into(k, 1, k, current, out);
  return out;
}

DerivativeJet derivative_jet(const OffspringLaw& law, int n, double q, int J) {
  check_args(n, q, J);
  JetStepper stepper(law, q, J);
  for (int g = 1; g <= n; ++g) stepper.step(g);
  return {q, n, stepper.values()};
}

std::vector<DerivativeJet> derivative_jet_path(const OffspringLaw& law, int n_max, double q, int J) {
  check_args(n_max, q, J);
  JetStepper stepper(law, q, J);
  std::vector<DerivativeJet> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  out.push_back({q, 0, stepper.values()});
  for (int g = 1; g <= n_max; ++g) {
    stepper.step(g);
    out.push_back({q, g, stepper.values()});
  }
  return out;
}

}  // namespace gwr
