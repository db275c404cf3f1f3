#pragma once

#include <stdexcept>
#include <string>

namespace flatblow {

// Argument outside the mathematical domain of an operation (p <= 1, xi = 0, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Index beyond a configured capacity (Hermite degree above M_max, grid range).
struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// NaN/Inf, step-size collapse or a failed convergence check.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrature or Parseval bookkeeping that does not add up.
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user configuration; `key` names the offending option.
struct UsageError : std::invalid_argument {
  UsageError(std::string key_, const std::string& msg)
      : std::invalid_argument(key_ + ": " + msg), key(std::move(key_)) {}
  std::string key;
};

}  // namespace flatblow
