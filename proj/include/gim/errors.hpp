#pragma once

#include <stdexcept>
#include <string>

namespace gim {

/// Invalid arguments or configuration (dimension mismatch, empty mask, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system failures and malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or an unusable Krylov recurrence.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gim
