#pragma once

#include <stdexcept>
#include <string>

namespace tabsynth {

// Shape mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong state, e.g. backward without a forward cache
// or sampling from an unfitted model.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or inconsistent input data (CSV, metadata, schemas).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or other numeric breakdown.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric that has no defined value for the given input (R2 with constant
// ground truth).
class UndefinedScoreError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace tabsynth
