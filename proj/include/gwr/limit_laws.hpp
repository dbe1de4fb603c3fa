#pragma once

#include <vector>

namespace gwr::limits {

// Regularized lower incomplete gamma P(j, u) for integer shape j >= 1:
// the probability that a sum of j unit exponentials is at most u.
double gamma_reg_int(int j, double u);

// E[s^J] for the small-population regime, J ~ lim Z(n - x phi(n), n).
double gf_small_phi(double s, double x);
// x * P(j, 1/x).
double reduced_small_pmf(double x, int j);
// x (1 - e^{-1/x}).
double mrca_cdf_small_phi(double x);

// E[s^J] for the linear band regime, J ~ lim Z(tn, n) given 0 < Z(n) <= aBn.
double gf_linear_band(double s, double t, double a);
// (1-t)/(1-e^{-a}) t^{j-1} P(j, a/(1-t)).
double band_pmf(double t, double a, int j);
// t (1 - e^{-a/t}) / (1 - e^{-a}), t in (0, 1].
double mrca_cdf_band(double t, double a);

// 1 - e^{-y} for y >= 0.
double yaglom_cdf(double y);
// s (1-t) / (1-ts).
double classical_reduced_gf(double s, double t);

// pmf values for j = 1..; stops once a term drops below 1e-16 of the running
// sum (and j_max terms at most when j_max > 0).
std::vector<double> reduced_small_pmf_series(double x, int j_max = 0);
std::vector<double> band_pmf_series(double t, double a, int j_max = 0);

}  // namespace gwr::limits
