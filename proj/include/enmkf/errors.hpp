#pragma once

#include <stdexcept>
#include <string>

namespace enmkf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix sizes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or prior specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV schema, cadence gaps, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Singular systems, failed factorizations, non-finite results.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace enmkf
