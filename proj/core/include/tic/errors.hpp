#pragma once

#include <stdexcept>
#include <string>

namespace tic {

// Invalid user-facing input: bad config values, unknown keys, grids that
// cannot be honored. Maps to CLI exit code 1.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Request outside the mathematical domain of an operation (e.g. evaluating
// a coefficient curve outside [0, T]). Maps to CLI exit code 1.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: nonfinite intermediates, degenerate first-order
// conditions, correctors that do not converge. Maps to CLI exit code 2.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tic
