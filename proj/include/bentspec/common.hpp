#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bentspec {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPiSq = kPi * kPi;

/// Bad user-supplied parameter (angle out of range, invalid mesh size, ...).
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Geometric inconsistency: point outside a domain, infeasible angle set, ...
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: factorization failure, non-convergence, ...
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bentspec
