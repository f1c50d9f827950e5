#pragma once

#include <stdexcept>
#include <string>

namespace hcann {

// Each subclass maps onto one CLI exit code (see tools/hcann_cli.cpp).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: out-of-range ids, k > n, mismatched lengths.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Vector lengths disagree with the dataset or codebook dimensionality.
class DimensionError : public ArgumentError {
  public:
    using ArgumentError::ArgumentError;
};

/// Malformed or truncated input file.
class FormatError : public Error {
  public:
    using Error::Error;
};

class EmptyDatasetError : public FormatError {
  public:
    using FormatError::FormatError;
};

/// Index file contents disagree with their header (short reads, bad slots).
class CorruptionError : public FormatError {
  public:
    using FormatError::FormatError;
};

/// Parameters that cannot be realized, e.g. a slot that does not fit a page.
class ConfigError : public ArgumentError {
  public:
    using ArgumentError::ArgumentError;
};

/// Operation invoked on an object in the wrong state (evicting from an empty cache).
class StateError : public Error {
  public:
    using Error::Error;
};

/// A checked internal invariant failed.
class InvariantError : public Error {
  public:
    using Error::Error;
};

}  // namespace hcann
