#pragma once

#include <stdexcept>
#include <string>

namespace mimic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, schema violations, impossible splits.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training or evaluation could not proceed (degenerate teacher, bad dims).
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Attempt to release something that must stay with the data owner.
class PrivacyError : public Error {
 public:
  using Error::Error;
};

/// Model file could not be parsed or failed validation.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimic
