#include "gwr/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace gwr::kernels {

namespace {

// Output length below which the OpenMP fork costs more than it saves.
constexpr std::ptrdiff_t kParallelThreshold = 256;

inline double dot_reversed(std::span<const double> a, std::span<const double> b, std::ptrdiff_t k) {
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - nb + 1);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(k, na - 1);
  double acc = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
#pragma omp simd reduction(+ : acc)
  for (std::ptrdiff_t i = lo; i <= hi; ++i) acc += pa[i] * pb[k - i];
  return acc;
}

}  // namespace

void truncated_product(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = dot_reversed(a, b, k);
}

void truncated_product_serial(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
  for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = dot_reversed(a, b, k);
}

void clamp_rounding(std::span<double> coeffs) {
  for (double& c : coeffs) {
    if (c < 0.0 && c >= -1e-14) c = 0.0;
  }
}

}  // namespace gwr::kernels
