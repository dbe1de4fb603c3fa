#pragma once

#include <span>

namespace gwr::kernels {

// out[k] = sum_{i=0..k} a[i] * b[k-i] for k < out.size(). Missing entries of
// a or b count as zero. out must not alias a or b.
void truncated_product(std::span<const double> a, std::span<const double> b, std::span<double> out);

// Serial reference for truncated_product; identical results.
void truncated_product_serial(std::span<const double> a, std::span<const double> b, std::span<double> out);

// Replace tiny negative rounding noise (>= -1e-14) by zero.
void clamp_rounding(std::span<double> coeffs);

}  // namespace gwr::kernels
