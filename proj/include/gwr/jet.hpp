#pragma once

#include <vector>

#include "gwr/offspring_law.hpp"

namespace gwr {

// Highest derivative order supported by the Faa di Bruno propagation.
inline constexpr int kMaxJetOrder = 20;

// A solution (i_1, ..., i_k) of 1*i_1 + 2*i_2 + ... + k*i_k = k.
using Partition = std::vector<int>;

// All solutions for order k, in descending lexicographic order.
// k=3 -> (3,0,0), (1,1,0), (0,0,1).
std::vector<Partition> enumerate_partitions(int k);

// (f_n(q), f_n'(q), ..., f_n^{(J)}(q)).
struct DerivativeJet {
  double q = 0.0;
  int n = 0;
  std::vector<double> values;

  int order() const { return static_cast<int>(values.size()) - 1; }
};

// Propagates the identity jet (q, 1, 0, ...) through n compositions with f.
// Throws JetOverflow if any derivative leaves the double range.
DerivativeJet derivative_jet(const OffspringLaw& law, int n, double q, int J);

// Jet of f_n for every n in 0..n_max (same q); jets[n] is the jet of f_n.
std::vector<DerivativeJet> derivative_jet_path(const OffspringLaw& law, int n_max, double q, int J);

}  // namespace gwr
