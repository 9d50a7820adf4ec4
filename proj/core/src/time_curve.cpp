#include "tic/time_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tic/errors.hpp"

namespace tic {

TimeCurve TimeCurve::constant(double value) {
  if (!std::isfinite(value)) throw config_error("curve value must be finite");
  return TimeCurve(value);
}

TimeCurve TimeCurve::piecewise(std::vector<std::pair<double, double>> breakpoints) {
  if (breakpoints.empty()) throw config_error("piecewise curve needs at least one breakpoint");
  TimeCurve c(0.0);
  c.times_.reserve(breakpoints.size());
  c.values_.reserve(breakpoints.size());
  for (const auto& [t, v] : breakpoints) {
    if (!std::isfinite(t) || !std::isfinite(v))
      throw config_error("curve breakpoints must be finite");
    if (!c.times_.empty() && t <= c.times_.back())
      throw config_error("curve breakpoint times must be strictly increasing");
    c.times_.push_back(t);
    c.values_.push_back(v);
  }
  if (c.times_.size() == 1) return constant(c.values_.front());
  return c;
}

double TimeCurve::operator()(double t) const {
  if (is_constant()) return value_;
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

double TimeCurve::min_time() const {
  return is_constant() ? -std::numeric_limits<double>::infinity() : times_.front();
}

double TimeCurve::max_time() const {
  return is_constant() ? std::numeric_limits<double>::infinity() : times_.back();
}

}  // namespace tic
