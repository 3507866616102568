#pragma once

#include <stdexcept>
#include <string>

namespace pseudogap {

// Invalid model/config input (bad weights, nonpositive hoppings, malformed JSON).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (t <= 0, k <= 1, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation not available for this ensemble type (e.g. continuous ensemble
// where a finite atom list is required).
struct UnsupportedOperationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cases the theory excludes: gamma0 = 0, hypothesis violations, no root of
// the moment equation.
struct UnsupportedCaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All transfer matrices equal +-1, nothing to diagonalize.
struct DegenerateEnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal consistency check failed (ensemble not critical, decomposition
// residual too large, gap label off an integer).
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough resolved data points for a fit.
struct UnderResolvedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pseudogap
