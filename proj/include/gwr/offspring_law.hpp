#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gwr {

enum class Family { LinearFractional, Poisson, TernaryUniform, CustomFinite };

std::string_view family_name(Family family);

// A critical offspring distribution (mean 1, finite positive variance 2B).
//
// Immutable after construction; safe to share between threads. Built-in
// families carry closed forms for the pgf and all of its derivatives, custom
// laws must have finite support.
class OffspringLaw {
 public:
  // LinearFractional takes an optional B (default 1, giving f(s) = 1/(2-s)).
  // Poisson takes an optional mean which must equal 1.
  // TernaryUniform takes no parameters.
  static OffspringLaw make_builtin(Family family, std::span<const double> params = {});

  // Finite pmf f_0..f_d. Drift of the total mass up to 1e-12 is normalized
  // away; anything larger is rejected.
  static OffspringLaw make_custom(std::vector<double> pmf);

  // "linear_fractional", "linear_fractional:0.5", "poisson", "ternary_uniform",
  // "custom:0.25,0.5,0.25".
  static OffspringLaw parse(std::string_view text);

  Family family() const noexcept { return family_; }
  // Canonical text form accepted by parse().
  const std::string& id() const noexcept { return id_; }
  double B() const noexcept { return B_; }
  bool aperiodic() const noexcept { return aperiodic_; }
  bool finite_support() const noexcept { return family_ == Family::TernaryUniform || family_ == Family::CustomFinite; }
  // Largest k with f_k > 0, or -1 for infinite support.
  int max_support() const noexcept;

  double pmf(int k) const;
  // f_0..f_K (zero padded for finite laws).
  std::vector<double> pmf_prefix(int K) const;

  double pgf(double s) const;
  // 1 - f(1 - Q), evaluated without cancellation for small Q.
  double one_minus_pgf(double survival) const;

  // (f(q), f'(q), ..., f^{(J)}(q)) for q in [0,1).
  std::vector<double> pgf_derivatives(double q, int J) const;
  // Allocation-free variant; writes out.size() values (orders 0..size-1).
  void pgf_derivatives_into(double q, std::span<double> out) const;
  // Same values at q = 1 - survival, survival in [0,1]; exact near q = 1.
  void pgf_derivatives_at_survival(double survival, std::span<double> out) const;

 private:
  OffspringLaw() = default;
  void finalize_finite();

  Family family_ = Family::CustomFinite;
  std::string id_;
  std::vector<double> finite_pmf_;  // finite families only
  double lf_B_ = 1.0;               // LinearFractional parameter
  double B_ = 0.0;
  bool aperiodic_ = true;
};

}  // namespace gwr
