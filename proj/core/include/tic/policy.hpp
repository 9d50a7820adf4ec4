#pragma once

#include <variant>
#include <vector>

#include "tic/coefficients.hpp"

namespace tic {

// Affine state-feedback map x -> alpha * x + beta.
struct AffineMap {
  double alpha = 0.0;
  double beta = 0.0;

  double operator()(double x) const { return alpha * x + beta; }
};

// Closed-loop feedback policy u(t, x) = alpha(t) x + beta(t), with alpha and
// beta piecewise-linear on a time grid covering [0, T].
class AffinePolicy {
 public:
  AffinePolicy() = default;
  AffinePolicy(std::vector<double> grid, std::vector<double> alpha,
               std::vector<double> beta);

  // Time-constant policy on [0, horizon].
  static AffinePolicy constant(double horizon, double alpha, double beta);

  AffineMap map_at(double t) const;
  double alpha_at(double t) const { return map_at(t).alpha; }
  double beta_at(double t) const { return map_at(t).beta; }
  double operator()(double t, double x) const { return map_at(t)(x); }

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& beta() const { return beta_; }
  double horizon() const { return grid_.back(); }

 private:
  std::vector<double> grid_;   // t_0 = 0 < ... < t_N
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

// Spike deviation: the base policy with its feedback map replaced by a fixed
// affine map on the half-open window [start, start + width).
struct SpikePolicy {
  AffinePolicy base;
  AffineMap deviation;
  double start = 0.0;
  double width = 0.0;  // may be zero (empty window)

  SpikePolicy() = default;
  SpikePolicy(AffinePolicy base_policy, AffineMap dev, double t, double eps);

  bool in_window(double t) const { return width > 0.0 && t >= start && t < start + width; }
  AffineMap map_at(double t) const { return in_window(t) ? deviation : base.map_at(t); }
  double operator()(double t, double x) const { return map_at(t)(x); }
  double horizon() const { return base.horizon(); }
};

using Policy = std::variant<AffinePolicy, SpikePolicy>;

AffineMap policy_map_at(const Policy& policy, double t);
inline double policy_control(const Policy& policy, double t, double x) {
  return policy_map_at(policy, t)(x);
}
double policy_horizon(const Policy& policy);

// Time points in (a, b) where the policy's map coefficients are non-smooth:
// grid nodes of the affine interpolant plus spike window edges.
std::vector<double> policy_kinks(const Policy& policy, double a, double b);

// Drift and diffusion of the state at (t, x) given the control value u:
//   b = A x + B u + C,  sigma = D u + F.
struct DriftDiffusion {
  double drift;
  double diffusion;
};
DriftDiffusion policy_drift_diffusion(const CoefficientSet& coeffs, double t,
                                      double x, double u);

}  // namespace tic
