#pragma once

#include <stdexcept>
#include <string>

namespace pdim {

// Precondition violations: bad shapes, out-of-domain parameters, malformed files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not deliver its postcondition (non-convergence,
// singular basis, loss of positive definiteness).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdim
