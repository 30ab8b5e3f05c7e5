#pragma once

#include <stdexcept>
#include <string>

namespace windoffer {

// Invalid input data or configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Required history/actuals are absent. Maps to CLI exit code 4.
class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The native solver declines an instance it cannot solve exactly
// (negative prices, oversized brute-force grid). Maps to CLI exit code 3.
class SolverRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace windoffer
