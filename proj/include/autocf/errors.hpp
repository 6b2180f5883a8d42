#pragma once
#include <stdexcept>
#include <string>

namespace autocf {

// Error taxonomy shared across the pipeline. Every subsystem throws one of
// these; the CLI maps ConfigError/ParseError family to exit code 2 and
// everything else to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or combination (bad ratios, unknown key, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input data; message carries the offending line number.
struct ParseError : Error {
  using Error::Error;
};

// Input file contained no usable interactions.
struct EmptyDatasetError : Error {
  using Error::Error;
};

// Tensor shape incompatibility.
struct DimensionError : Error {
  using Error::Error;
};

// Math domain violation (log of non-positive, ...).
struct DomainError : Error {
  using Error::Error;
};

// Node or row index out of range.
struct IndexError : Error {
  using Error::Error;
};

// Request exceeds what the structure can host (e.g. noise on a full graph).
struct CapacityError : Error {
  using Error::Error;
};

// A closure that must be deterministic returned two different values.
struct ReproducibilityError : Error {
  using Error::Error;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace autocf
