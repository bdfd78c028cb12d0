#pragma once

#include <stdexcept>

namespace rotacalc {

// Raised when inputs violate a documented precondition or a computation
// cannot produce a meaningful answer. The CLI maps it to exit status 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed command lines and configuration files (exit status 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rotacalc
