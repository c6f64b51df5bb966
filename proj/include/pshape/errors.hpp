#pragma once

#include <stdexcept>
#include <string>

namespace pshape {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/network shape mismatches. Messages name both shapes.
struct DimensionError : Error {
  using Error::Error;
};

// Operation applied to an empty set (e.g. max-pool over zero rows).
struct EmptySetError : Error {
  using Error::Error;
};

// Violated API contract (non-scalar loss node, bad argument combination).
struct ContractError : Error {
  using Error::Error;
};

// Two point clouds that must have equal cardinality do not.
struct CardinalityError : Error {
  using Error::Error;
};

// Exact assignment solver asked to handle more points than its cap.
struct SolverCapError : Error {
  using Error::Error;
};

// Bad run configuration (schema violation, conflicting hyperparameters).
struct ConfigError : Error {
  using Error::Error;
};

// Bad input data (parse failures, missing files, empty splits).
struct DataError : Error {
  using Error::Error;
};

// Checkpoint file fails magic/version/checksum validation.
struct CorruptionError : DataError {
  using DataError::DataError;
};

// Degenerate geometry (all points identical, zero radius).
struct DegeneracyError : DataError {
  using DataError::DataError;
};

// Label outside the configured class range.
struct LabelError : DataError {
  using DataError::DataError;
};

// Non-finite value where a finite one is required (diverged training, NaN gradient).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace pshape
