#pragma once

#include <stdexcept>
#include <string>

namespace ract {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad option combinations, out-of-range hyperparameters.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input files, schema violations, dimension mismatches.
struct DataError : Error {
  using Error::Error;
};

// Constraint satisfaction is impossible (e.g. confidence-adjusted
// coverage target drops below zero).
struct InfeasibleError : Error {
  using Error::Error;
};

// Metric not defined on the given input (e.g. AUC with one class).
struct UndefinedMetricError : Error {
  using Error::Error;
};

}  // namespace ract
