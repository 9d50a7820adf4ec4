#pragma once

#include <vector>

#include "tic/time_curve.hpp"

namespace tic {

// Coefficient values of the controlled dynamics at a fixed time:
//   dX = (a X + b u + c) dt + (d u + f) dW.
struct CoefficientValues {
  double a, b, c, d, f;
};

// Time-varying coefficient set of the linear controlled SDE on [0, T].
struct CoefficientSet {
  double horizon = 1.0;  // T
  TimeCurve A, B, C, D, F;

  // Validates horizon > 0 and that every breakpoint lies inside [0, T].
  void validate() const;

  // Piecewise-linear evaluation at t; throws domain_error outside [0, T].
  CoefficientValues eval(double t) const;

  // Union of curve breakpoints in the open interval (a, b), sorted.
  std::vector<double> kinks_between(double a, double b) const;

  bool all_constant() const;
};

}  // namespace tic
