#include "gwr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "gwr/errors.hpp"
#include "gwr/rng.hpp"

namespace gwr::stats {

double tv_distance(std::span<const double> p, std::span<const double> q) {
  const std::size_t len = std::max(p.size(), q.size());
  double l1 = 0.0, sum_p = 0.0, sum_q = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    l1 += std::abs(a - b);
    sum_p += a;
    sum_q += b;
  }
  const double tail_p = std::max(0.0, 1.0 - sum_p);
  const double tail_q = std::max(0.0, 1.0 - sum_q);
  return std::min(1.0, 0.5 * l1 + 0.5 * std::abs(tail_p - tail_q));
}

double table_gf(std::span<const double> pmf, double s) {
  double acc = 0.0;
  for (std::size_t i = pmf.size(); i-- > 0;) acc = (acc + pmf[i]) * s;
  return acc;
}

double gf_supnorm(const std::function<double(double)>& exact, const std::function<double(double)>& limit,
                  std::span<const double> s_grid) {
  double worst = 0.0;
  for (double s : s_grid) worst = std::max(worst, std::abs(exact(s) - limit(s)));
  return worst;
}

std::vector<double> default_s_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<double> empirical_pmf(std::span<const std::uint64_t> samples, int j_max) {
  std::vector<double> pmf(static_cast<std::size_t>(std::max(j_max, 0)), 0.0);
  if (samples.empty()) return pmf;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (std::uint64_t v : samples) {
    if (v >= 1 && v <= static_cast<std::uint64_t>(j_max)) pmf[v - 1] += w;
  }
  return pmf;
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> samples, std::span<const double> pmf,
                               double min_expected) {
  if (samples.empty()) throw DomainError("chi-square test needs samples");
  const double total = static_cast<double>(samples.size());
  const std::size_t J = pmf.size();

  // cells 0..J-1 for j = 1..J, cell J for overflow
  std::vector<double> observed(J + 1, 0.0), expected(J + 1, 0.0);
  for (std::uint64_t v : samples) {
    if (v >= 1 && v <= J) {
      observed[v - 1] += 1.0;
    } else {
      observed[J] += 1.0;
    }
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < J; ++i) {
    expected[i] = pmf[i] * total;
    mass += pmf[i];
  }
  expected[J] = std::max(0.0, 1.0 - mass) * total;

  bool impossible = false;
  for (std::size_t i = 0; i <= J; ++i) impossible |= expected[i] == 0.0 && observed[i] > 0.0;

  // merge from the right
  std::vector<double> obs_bins, exp_bins;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = J + 1; i-- > 0;) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp_bins.empty()) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
    } else {
      obs_bins.back() += o_acc;
      exp_bins.back() += e_acc;
    }
  }

  ChiSquareResult r;
  r.bins = static_cast<int>(obs_bins.size());
  for (std::size_t i = 0; i < obs_bins.size(); ++i) {
    const double d = obs_bins[i] - exp_bins[i];
    if (exp_bins[i] > 0.0) {
      r.statistic += d * d / exp_bins[i];
    } else if (obs_bins[i] > 0.0) {
      r.statistic = std::numeric_limits<double>::infinity();
    }
  }
  if (impossible) r.statistic = std::numeric_limits<double>::infinity();
  r.dof = std::max(1, r.bins - 1);
  r.p_value = std::isinf(r.statistic) ? 0.0 : boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0);
  return r;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS distance needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size();) {
    // ties: jump the empirical cdf across all equal values at once
    std::size_t k = i;
    while (k < samples.size() && samples[k] == samples[i]) ++k;
    const double F = cdf(samples[i]);
    worst = std::max({worst, std::abs(F - i / n), std::abs(F - k / n)});
    i = k;
  }
  return worst;
}

double bootstrap_tv_se(std::span<const std::uint64_t> samples, std::span<const double> reference, int resamples,
                       std::uint64_t seed) {
  if (samples.empty() || resamples < 2) return 0.0;
  const int j_max = static_cast<int>(reference.size());
  std::vector<std::uint64_t> draw(samples.size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    for (auto& d : draw) d = samples[rng() % samples.size()];
    values.push_back(tv_distance(empirical_pmf(draw, j_max), reference));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / resamples;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (resamples - 1));
}

}  // namespace gwr::stats
