#pragma once

#include <utility>
#include <vector>

namespace tic {

// Scalar curve on a time interval: either a constant or a piecewise-linear
// interpolant through strictly increasing breakpoints, with constant
// extrapolation beyond the first/last breakpoint.
class TimeCurve {
 public:
  TimeCurve() : TimeCurve(0.0) {}

  static TimeCurve constant(double value);
  static TimeCurve piecewise(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double t) const;

  bool is_constant() const { return times_.empty(); }
  double constant_value() const { return value_; }

  // Breakpoint times (empty for constants). Kinks of the interpolant;
  // integrators split steps here.
  const std::vector<double>& breakpoint_times() const { return times_; }
  double min_time() const;
  double max_time() const;

 private:
  explicit TimeCurve(double value) : value_(value) {}

  double value_ = 0.0;              // constant case
  std::vector<double> times_;       // piecewise case, strictly increasing
  std::vector<double> values_;
};

}  // namespace tic
