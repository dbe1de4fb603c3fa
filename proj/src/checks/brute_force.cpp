#include "checks/brute_force.hpp"

#include <stdexcept>

namespace gwr::checks {

namespace {

using boost::multiprecision::cpp_int;

struct Enumerator {
  const std::vector<std::uint64_t>& weights;
  std::uint64_t denominator;
  int n;
  int reproducer_cap;  // largest possible number of individuals in generations 0..n-1
  std::vector<std::vector<int>> counts;  // counts[g][i]
  std::vector<std::vector<std::vector<cpp_int>>>& joint;
  std::vector<std::vector<cpp_int>>& mrca;
  std::vector<unsigned __int128> denom_powers;

  // Weight of the current tree is prod(weights) * denominator^{cap - reproducers}.
  void visit(int g, std::size_t i, int next_size, unsigned __int128 weight, int reproducers) {
    if (g == n) {
      record(weight * denom_powers[reproducer_cap - reproducers]);
      return;
    }
    auto& gen = counts[g];
    if (i == gen.size()) {
      counts[g + 1].assign(static_cast<std::size_t>(next_size), 0);
      if (next_size == 0) {
        for (int h = g + 1; h < n; ++h) counts[h + 1].clear();
        record(weight * denom_powers[reproducer_cap - reproducers]);
        return;
      }
      visit(g + 1, 0, 0, weight, reproducers);
      return;
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] == 0) continue;
      gen[i] = static_cast<int>(k);
      visit(g, i + 1, next_size + static_cast<int>(k), weight * weights[k], reproducers + 1);
    }
  }

  void record(unsigned __int128 w) {
    // reduced counts by backward marking
    const int zn = static_cast<int>(counts[n].size());
    std::vector<int> Z(static_cast<std::size_t>(n) + 1, 0);
    Z[n] = zn;
    std::vector<char> alive(static_cast<std::size_t>(zn), 1);
    for (int g = n - 1; g >= 0; --g) {
      std::vector<char> parent(counts[g].size(), 0);
      std::size_t child = 0;
      for (std::size_t i = 0; i < counts[g].size(); ++i) {
        for (int c = 0; c < counts[g][i]; ++c, ++child) {
          if (child < alive.size() && alive[child]) parent[i] = 1;
        }
        Z[g] += parent[i];
      }
      alive.swap(parent);
    }
    cpp_int weight = static_cast<std::uint64_t>(w >> 64);
    weight <<= 64;
    weight += static_cast<std::uint64_t>(w);
    for (int m = 0; m <= n; ++m) joint[m][Z[m]][zn] += weight;
    if (zn > 0) {
      int d = 0;
      for (int m = n - 1; m >= 0; --m) {
        if (Z[m] == 1) {
          d = n - m;
          break;
        }
      }
      mrca[d][zn] += weight;
    }
  }
};

}  // namespace

BruteForceTrees::BruteForceTrees(std::vector<std::uint64_t> weights, std::uint64_t denominator, int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("brute force needs n >= 1");
  std::uint64_t total = 0;
  for (auto w : weights) total += w;
  if (total != denominator) throw std::invalid_argument("weights must sum to the denominator");
  const int d = static_cast<int>(weights.size()) - 1;

  // population bounds per generation
  int pop = 1, reproducers = 0;
  max_pop_ = 1;
  for (int g = 0; g < n; ++g) {
    reproducers += pop;
    pop *= d;
    max_pop_ = std::max(max_pop_, pop);
  }
  max_pop_ = std::max(max_pop_, pop);

  // exact integer weights must fit in 128 bits
  long double log2_den = std::log2(static_cast<long double>(denominator));
  if (log2_den * reproducers > 126.0L) throw std::invalid_argument("tree space too large for exact enumeration");

  joint_.assign(static_cast<std::size_t>(n) + 1,
                std::vector<std::vector<cpp_int>>(static_cast<std::size_t>(max_pop_) + 1,
                                                  std::vector<cpp_int>(static_cast<std::size_t>(max_pop_) + 1)));
  mrca_.assign(static_cast<std::size_t>(n) + 1, std::vector<cpp_int>(static_cast<std::size_t>(max_pop_) + 1));

  Enumerator e{weights, denominator, n, reproducers, {}, joint_, mrca_, {}};
  e.counts.assign(static_cast<std::size_t>(n) + 1, {});
  e.counts[0].assign(1, 0);
  e.denom_powers.assign(static_cast<std::size_t>(reproducers) + 1, 1);
  for (int i = 1; i <= reproducers; ++i) e.denom_powers[i] = e.denom_powers[i - 1] * denominator;
  e.visit(0, 0, 0, 1, 0);

  cpp_int full = 1;
  for (int i = 0; i < reproducers; ++i) full *= denominator;
  scale_ = Rational(1, full);
}

Rational BruteForceTrees::joint(int m, int j, int z) const {
  if (j < 0 || j > max_pop_ || z < 0 || z > max_pop_) return 0;
  return Rational(joint_[m][j][z]) * scale_;
}

Rational BruteForceTrees::reduced(int m, int j) const {
  Rational acc = 0;
  for (int z = 1; z <= max_pop_; ++z) acc += joint(m, j, z);
  return acc;
}

Rational BruteForceTrees::reduced_bounded(int m, int j, int C) const {
  Rational acc = 0;
  for (int z = 1; z <= std::min(C, max_pop_); ++z) acc += joint(m, j, z);
  return acc;
}

Rational BruteForceTrees::event(int C) const {
  Rational acc = 0;
  for (int j = 1; j <= max_pop_; ++j) acc += reduced_bounded(n_, j, C);
  return acc;
}

Rational BruteForceTrees::mrca_bounded(int u, int C) const {
  Rational acc = 0;
  for (int d = 1; d <= std::min(u, n_); ++d) {
    for (int z = 1; z <= std::min(C, max_pop_); ++z) acc += Rational(mrca_[d][z]) * scale_;
  }
  return acc;
}

}  // namespace gwr::checks
