#pragma once

#include <stdexcept>
#include <string>

namespace rmab {

// Malformed or inconsistent input data (bad CSV rows, schema mismatches,
// impossible model requests). Maps to CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (value iteration did not converge, Whittle bisection
// bracket failure, singular design matrix). Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rmab
