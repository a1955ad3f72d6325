#pragma once

#include <stdexcept>
#include <string>

namespace bernstein {

/// Bad argument or violated precondition (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested operation is not defined for the given data (CLI exit code 2).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Floating-point failure: overflow, underflow, non-finite integrand (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the supported numeric range (e.g. Hermite degree cap).
class OutOfRangeError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Two evaluation routes that must agree did not.
class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace bernstein
