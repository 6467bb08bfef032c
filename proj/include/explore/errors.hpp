#pragma once

#include <stdexcept>
#include <string>

namespace explore {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: unknown key, out-of-range value, malformed config
// file. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data: counts with N+ > N, scores outside
// [0,1], unparseable persisted rows.
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace explore
