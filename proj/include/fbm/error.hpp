#pragma once

#include <stdexcept>
#include <string>

namespace fbm {

// Bad input: malformed arguments, unsupported shapes, out-of-range values.
// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Filesystem or parse failures on persisted artifacts. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fbm
