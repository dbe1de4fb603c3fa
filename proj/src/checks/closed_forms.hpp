#pragma once

#include <vector>

#include "gwr/offspring_law.hpp"

namespace gwr::checks {

// Closed forms for f(s) = 1/(2-s), whose iterates are
// f_n(s) = (n - (n-1)s) / (n + 1 - ns).
double lf_extinction(int n);
double lf_pmf(int n, int k);
// f_n^{(j)}(s) = j! n^{j-1} / (n + 1 - ns)^{j+1}, j >= 1
double lf_derivative(int n, int j, double s);
// f_n'(q_r) = (r+1)^2 / (n+r+1)^2
double lf_derivative_at_extinction(int n, int r);

// Number of integer partitions of k by the Euler recurrence.
long long partition_count(int k);

// P(Z(m,n) = j) via binomial thinning of the law of Z(m): each of the Z(m)
// individuals independently survives to n with probability Q(n-m).
// Uses only the pgf series, no derivatives.
std::vector<double> reduced_pmf_by_thinning(const OffspringLaw& law, int m, int n, int J, int K);

}  // namespace gwr::checks
