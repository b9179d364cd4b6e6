#pragma once

#include <stdexcept>
#include <string>

namespace hybridlik {

// Two error families. ConfigError covers bad user input (unknown names,
// malformed grids, infeasible cell layouts); NumericalError covers breakdowns
// of an otherwise valid computation. The CLI maps them to exit codes 2 and 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedModel : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidLevel : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidCells : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidGrid : ConfigError {
  using ConfigError::ConfigError;
};
struct InvalidInput : ConfigError {
  using ConfigError::ConfigError;
};
struct UnsupportedControls : ConfigError {
  using ConfigError::ConfigError;
};

struct NumericalFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct OptimizationFailure : NumericalError {
  using NumericalError::NumericalError;
};
// Controls lying in the span of the model scores (or otherwise collinear)
// make the joint variance of (scores, controls) rank deficient.
struct DegenerateControls : NumericalError {
  using NumericalError::NumericalError;
};
struct DegenerateFocus : NumericalError {
  using NumericalError::NumericalError;
};
struct ProfileInfeasible : NumericalError {
  using NumericalError::NumericalError;
};
struct WideFitFailure : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace hybridlik
