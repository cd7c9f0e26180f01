#pragma once

#include <stdexcept>
#include <string>

namespace curvelab {

// Precondition violations raised by the numerical kernels.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed experiment configuration; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

}  // namespace curvelab
