#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace gwr::checks {

using Rational = boost::multiprecision::cpp_rational;

// Exhaustive enumeration of every Galton-Watson tree of depth n for a finite
// offspring law with rational probabilities weights[k] / denominator.
// Tree probabilities are accumulated exactly.
class BruteForceTrees {
 public:
  BruteForceTrees(std::vector<std::uint64_t> weights, std::uint64_t denominator, int n);

  int n() const { return n_; }
  int max_population() const { return max_pop_; }

  // P(Z(m,n) = j, Z(n) = z)
  Rational joint(int m, int j, int z) const;
  // P(Z(m,n) = j), j >= 1
  Rational reduced(int m, int j) const;
  // P(Z(m,n) = j, 0 < Z(n) <= C)
  Rational reduced_bounded(int m, int j, int C) const;
  // P(0 < Z(n) <= C)
  Rational event(int C) const;
  // P(d(n) <= u, 0 < Z(n) <= C) with d(n) computed from each tree's genealogy
  Rational mrca_bounded(int u, int C) const;

 private:
  int n_;
  int max_pop_;
  Rational scale_;  // 1 / denominator^{reproducing individuals cap}
  // joint_[m][j][z], integer weights over a common denominator
  std::vector<std::vector<std::vector<boost::multiprecision::cpp_int>>> joint_;
  // mrca_[d][z]
  std::vector<std::vector<boost::multiprecision::cpp_int>> mrca_;
};

}  // namespace gwr::checks
