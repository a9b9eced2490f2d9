#pragma once

#include <stdexcept>
#include <string>

namespace entshape {

// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated: out-of-range parameter, dimension mismatch,
// state that fails the density-matrix invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace entshape
