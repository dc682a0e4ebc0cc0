#pragma once

#include <stdexcept>
#include <string>

namespace aoicache {

/// A caller-supplied parameter is outside its admissible range.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model assumption (irreducibility, ergodicity) does not hold.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to converge or returned an unusable status.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoicache
