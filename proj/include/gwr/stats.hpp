#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gwr::stats {

// Total variation between two pmfs over j = 1.. (index j-1). Mass missing from
// either table (1 - sum) is lumped into one shared overflow cell.
double tv_distance(std::span<const double> p, std::span<const double> q);

// sum_j s^j p_j for a pmf over j = 1.. (index j-1).
double table_gf(std::span<const double> pmf, double s);

// max over the grid of |exact(s) - limit(s)|.
double gf_supnorm(const std::function<double(double)>& exact, const std::function<double(double)>& limit,
                  std::span<const double> s_grid);

// {0, 0.1, ..., 1.0}
std::vector<double> default_s_grid();

// Empirical pmf over j = 1..j_max of positive integer samples; values above
// j_max stay unaccounted (they become the overflow cell in tv_distance).
std::vector<double> empirical_pmf(std::span<const std::uint64_t> samples, int j_max);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};

// Pearson goodness of fit of positive integer samples against pmf (j = 1..,
// index j-1, remaining mass as an overflow bin). Adjacent bins are merged
// from the right until every expected count is at least min_expected.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> samples, std::span<const double> pmf,
                               double min_expected = 5.0);

// sup_y |F_emp(y) - cdf(y)|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

// Standard deviation of tv_distance(empirical_pmf(resample), reference) over
// bootstrap resamples of the samples.
double bootstrap_tv_se(std::span<const std::uint64_t> samples, std::span<const double> reference, int resamples,
                       std::uint64_t seed);

}  // namespace gwr::stats
