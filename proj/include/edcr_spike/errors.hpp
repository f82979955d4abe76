#pragma once

#include <stdexcept>
#include <string>

namespace edcr_spike {

// Bad input: malformed files, violated preconditions, unknown names.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures (missing files, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edcr_spike
