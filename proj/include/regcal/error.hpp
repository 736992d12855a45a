#pragma once

#include <stdexcept>

namespace regcal {

/// Raised when a computation produces non-finite values or a factorization
/// breaks down. Argument problems use std::invalid_argument.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace regcal
