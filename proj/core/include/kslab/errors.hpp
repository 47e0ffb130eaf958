#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

/// Argument outside the mathematical domain of an operation (r = 0, t >= T, d < 3, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A profile that breaks its invariants (negative mass, decreasing M, bad grid).
class InvalidProfile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that fails validation: unknown config keys, malformed CSV, bad flags.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrators, solvers and shooting runs that cannot produce a result.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kslab
