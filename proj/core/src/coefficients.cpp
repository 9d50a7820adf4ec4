#include "tic/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "tic/errors.hpp"

namespace tic {

namespace {

void check_breakpoints(const TimeCurve& curve, double horizon, const char* name) {
  for (double t : curve.breakpoint_times()) {
    if (t < 0.0 || t > horizon)
      throw config_error(std::string("coefficient ") + name +
                         ": breakpoint outside [0, horizon]");
  }
}

}  // namespace

void CoefficientSet::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw config_error("horizon must be positive and finite");
  check_breakpoints(A, horizon, "A");
  check_breakpoints(B, horizon, "B");
  check_breakpoints(C, horizon, "C");
  check_breakpoints(D, horizon, "D");
  check_breakpoints(F, horizon, "F");
}

CoefficientValues CoefficientSet::eval(double t) const {
  if (t < 0.0 || t > horizon)
    throw domain_error("coefficient evaluation outside [0, horizon]");
  return CoefficientValues{A(t), B(t), C(t), D(t), F(t)};
}

std::vector<double> CoefficientSet::kinks_between(double a, double b) const {
  std::vector<double> out;
  for (const TimeCurve* c : {&A, &B, &C, &D, &F}) {
    for (double t : c->breakpoint_times()) {
      if (t > a && t < b) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CoefficientSet::all_constant() const {
  return A.is_constant() && B.is_constant() && C.is_constant() &&
         D.is_constant() && F.is_constant();
}

}  // namespace tic
