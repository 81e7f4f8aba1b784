#pragma once

#include <stdexcept>
#include <string>

namespace vkplate {

/// Bad input data: malformed tensors, out-of-range parameters, ill-posed meshes.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: singular systems, Newton divergence, eigensolver stall.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vkplate
