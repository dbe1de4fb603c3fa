#pragma once

#include <stdexcept>
#include <string>

namespace gwr {

// Base for all library errors. User-facing errors map to CLI exit code 1,
// InvariantViolation maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NonCritical : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class JetOverflow : public Error {
 public:
  using Error::Error;
};

class ConditioningImpossible : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed; indicates a bug rather than bad input.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& what, std::string diagnostic)
      : Error(what), diagnostic_(std::move(diagnostic)) {}
  const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  std::string diagnostic_;
};

}  // namespace gwr
