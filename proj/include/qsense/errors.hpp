#pragma once

#include <stdexcept>
#include <string>

namespace qsense {

// Invalid user input: malformed config files, out-of-range parameters,
// unknown device names, inconsistent CLI flags.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input that does not match what an operation requires, e.g. a
// shot table whose qubit list disagrees with the circuit it is compared to.
class DataMismatchError : public std::runtime_error {
 public:
  explicit DataMismatchError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace qsense
