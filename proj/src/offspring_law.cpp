#include "gwr/offspring_law.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "gwr/errors.hpp"

namespace gwr {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kCriticalityTolerance = 1e-9;

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto first = text.data();
  auto last = text.data() + text.size();
  while (first != last && *first == ' ') ++first;
  while (last != first && last[-1] == ' ') --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw DomainError("cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::LinearFractional: return "linear_fractional";
    case Family::Poisson: return "poisson";
    case Family::TernaryUniform: return "ternary_uniform";
    case Family::CustomFinite: return "custom";
  }
  return "unknown";
}

OffspringLaw OffspringLaw::make_builtin(Family family, std::span<const double> params) {
  OffspringLaw law;
  law.family_ = family;
  switch (family) {
    case Family::LinearFractional: {
      if (params.size() > 1) throw DomainError("linear_fractional takes at most one parameter (B)");
      double b = params.empty() ? 1.0 : params[0];
      if (!(b > 0.0) || !std::isfinite(b)) throw DegenerateVariance("linear_fractional requires B in (0, inf)");
      law.lf_B_ = b;
      law.B_ = b;
      law.aperiodic_ = true;
      law.id_ = params.empty() ? "linear_fractional" : "linear_fractional:" + shortest(b);
      return law;
    }
    case Family::Poisson: {
      if (params.size() > 1) throw DomainError("poisson takes at most one parameter (mean)");
      if (!params.empty() && std::abs(params[0] - 1.0) > kCriticalityTolerance) {
        throw NonCritical("poisson offspring law must have mean 1, got " + shortest(params[0]));
      }
      law.B_ = 0.5;
      law.aperiodic_ = true;
      law.id_ = "poisson";
      return law;
    }
    case Family::TernaryUniform: {
      if (!params.empty()) throw DomainError("ternary_uniform takes no parameters");
      law.finite_pmf_ = {0.25, 0.5, 0.25};
      law.finalize_finite();
      law.family_ = Family::TernaryUniform;
      law.id_ = "ternary_uniform";
      return law;
    }
    case Family::CustomFinite:
      return make_custom({params.begin(), params.end()});
  }
  throw DomainError("unknown offspring family");
}

OffspringLaw OffspringLaw::make_custom(std::vector<double> pmf) {
  while (!pmf.empty() && pmf.back() == 0.0) pmf.pop_back();
  if (pmf.empty()) throw DomainError("custom pmf is empty");
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("custom pmf entries must be finite and nonnegative");
  }
  double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw DomainError("custom pmf sums to " + shortest(total) + ", not 1");
  }
  for (double& p : pmf) p /= total;

  OffspringLaw law;
  law.family_ = Family::CustomFinite;
  law.finite_pmf_ = std::move(pmf);
  law.finalize_finite();
  law.id_ = "custom:";
  for (std::size_t k = 0; k < law.finite_pmf_.size(); ++k) {
    if (k) law.id_ += ',';
    law.id_ += shortest(law.finite_pmf_[k]);
  }
  return law;
}

void OffspringLaw::finalize_finite() {
  double mean = 0.0, factorial2 = 0.0;
  unsigned g = 0;
  for (std::size_t k = 0; k < finite_pmf_.size(); ++k) {
    double p = finite_pmf_[k];
    mean += static_cast<double>(k) * p;
    factorial2 += static_cast<double>(k) * (static_cast<double>(k) - 1.0) * p;
    if (k >= 1 && p > 0.0) g = std::gcd(g, static_cast<unsigned>(k));
  }
  if (std::abs(mean - 1.0) > kCriticalityTolerance) {
    throw NonCritical("offspring mean is " + shortest(mean) + ", not 1");
  }
  double variance = factorial2 + mean - mean * mean;
  if (!(variance > kCriticalityTolerance)) throw DegenerateVariance("offspring variance is zero");
  B_ = variance / 2.0;
  aperiodic_ = (g == 1) && finite_pmf_[0] > 0.0;
}

OffspringLaw OffspringLaw::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view name = text.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string_view::npos) params = parse_list(text.substr(colon + 1));
  if (name == "linear_fractional") return make_builtin(Family::LinearFractional, params);
  if (name == "poisson") return make_builtin(Family::Poisson, params);
  if (name == "ternary_uniform") return make_builtin(Family::TernaryUniform, params);
  if (name == "custom") return make_custom(std::move(params));
  throw DomainError("unknown law '" + std::string(text) + "'");
}

int OffspringLaw::max_support() const noexcept {
  return finite_support() ? static_cast<int>(finite_pmf_.size()) - 1 : -1;
}

double OffspringLaw::pmf(int k) const {
  if (k < 0) return 0.0;
  switch (family_) {
    case Family::LinearFractional: {
      double b = lf_B_;
      if (k == 0) return b / (1.0 + b);
      return std::pow(1.0 + b, -2.0) * std::pow(b / (1.0 + b), k - 1);
    }
    case Family::Poisson:
      return std::exp(-1.0 - std::lgamma(k + 1.0));
    default:
      return k < static_cast<int>(finite_pmf_.size()) ? finite_pmf_[k] : 0.0;
  }
}

std::vector<double> OffspringLaw::pmf_prefix(int K) const {
  std::vector<double> out(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) out[k] = pmf(k);
  return out;
}

double OffspringLaw::pgf(double s) const {
  switch (family_) {
    case Family::LinearFractional: return 1.0 - (1.0 - s) / (1.0 + lf_B_ * (1.0 - s));
    case Family::Poisson: return std::exp(s - 1.0);
    default: {
      double acc = 0.0;
      for (auto it = finite_pmf_.rbegin(); it != finite_pmf_.rend(); ++it) acc = acc * s + *it;
      return acc;
    }
  }
}

double OffspringLaw::one_minus_pgf(double survival) const {
  double Q = survival;
  switch (family_) {
    case Family::LinearFractional: return Q / (1.0 + lf_B_ * Q);
    case Family::Poisson: return -std::expm1(-Q);
    default: {
      double log_s = std::log1p(-Q);
      double acc = 0.0;
      for (std::size_t k = 1; k < finite_pmf_.size(); ++k) {
        acc += finite_pmf_[k] * -std::expm1(static_cast<double>(k) * log_s);
      }
      return acc;
    }
  }
}

std::vector<double> OffspringLaw::pgf_derivatives(double q, int J) const {
  if (J < 0) throw DomainError("derivative order must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(J) + 1);
  pgf_derivatives_into(q, out);
  return out;
}

void OffspringLaw::pgf_derivatives_into(double q, std::span<double> out) const {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("pgf derivatives need q in [0,1), got " + shortest(q));
  pgf_derivatives_at_survival(1.0 - q, out);
}

void OffspringLaw::pgf_derivatives_at_survival(double survival, std::span<double> out) const {
  if (!(survival >= 0.0 && survival <= 1.0)) {
    throw DomainError("pgf derivatives need survival in [0,1], got " + shortest(survival));
  }
  if (out.empty()) return;
  const double q = 1.0 - survival;
  switch (family_) {
    case Family::LinearFractional: {
      // f^{(j)}(q) = j! B^{j-1} / u^{j+1}, u = 1 + B(1-q)
      double u = 1.0 + lf_B_ * survival;
      out[0] = 1.0 - one_minus_pgf(survival);
      double term = 1.0 / (u * u);  // j = 1
      for (std::size_t j = 1; j < out.size(); ++j) {
        out[j] = term;
        term *= static_cast<double>(j + 1) * lf_B_ / u;
      }
      return;
    }
    case Family::Poisson: {
      double v = std::exp(-survival);
      for (double& o : out) o = v;
      return;
    }
    default: {
      const int d = static_cast<int>(finite_pmf_.size()) - 1;
      for (std::size_t j = 0; j < out.size(); ++j) {
        const int jj = static_cast<int>(j);
        if (jj > d) {
          out[j] = 0.0;
          continue;
        }
        // sum_{k>=j} f_k k!/(k-j)! q^{k-j}, Horner in q
        double acc = 0.0;
        for (int k = d; k >= jj; --k) {
          double falling = 1.0;
          for (int i = 0; i < jj; ++i) falling *= static_cast<double>(k - i);
          acc = acc * q + finite_pmf_[k] * falling;
        }
        out[j] = acc;
      }
      return;
    }
  }
}

}  // namespace gwr
