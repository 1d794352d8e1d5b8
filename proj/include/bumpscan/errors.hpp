#pragma once

#include <stdexcept>
#include <string>

namespace bumpscan {

/// Malformed or out-of-range user input (bad coefficients, widths, levels).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model outside the stationary/invertible domain required by an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Levinson recursion hit a reflection coefficient at the degeneracy bound.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not available for this model class (e.g. banded precision with MA part).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bumpscan
