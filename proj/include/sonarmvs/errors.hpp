#pragma once

#include <stdexcept>
#include <string>

namespace sonarmvs {

// Error categories map onto the CLI exit codes (2 config, 3 I/O, 4 data).

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A zero-length vector has no spherical direction.
class DegeneratePointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Scene geometry that cannot be rendered (e.g. a mesh with zero area).
class InvalidSceneError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace sonarmvs
