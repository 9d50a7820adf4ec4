#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tic/moments.hpp"
#include "tic/objective.hpp"
#include "tic/policy.hpp"

namespace tic {

struct SolverOptions {
  double ode_step = 0.0;                     // 0 = horizon / 2048
  double corrector_tol = 1e-10;
  int max_corrector_iters = 8;
  double foc_tolerance = 1e-7;               // stationarity diagnostic threshold
  double affine_residual_threshold = 1e-6;   // non-affine equilibrium warning
  double degenerate_denominator = 1e-12;     // |D^2 sum w_k Y_k''| below this aborts

  double resolved_step(double horizon) const {
    return ode_step > 0.0 ? ode_step : default_ode_step(horizon);
  }
};

// Weighted expansion data of the value map at a state: given the moment
// polynomials Y_k(t, .) and the objective, h(x) = sum_k w_k Y_k(t, x) with
// s1 = h'(x), s2 = h''(x) evaluated with the weights frozen at x.
struct PointExpansion {
  double y1 = 0.0;
  CentralMoments moments;
  Eigen::VectorXd weights;
  double s1 = 0.0;
  double s2 = 0.0;
};

PointExpansion point_expansion(const MomentPolynomials& polys, const PsiSpec& spec, double x);

// First-order coefficient of the spike-deviation gain in the window width:
//   Gamma_1 = sum_k w_k [db Y_k' + (dsigma^2 / 2) Y_k'']
// with db = B (v - u), dsigma^2 = (D v + F)^2 - (D u + F)^2, both controls
// evaluated at (t, x).
double gamma1(const CoefficientSet& coeffs, const Policy& policy, double t, double x,
              const PsiSpec& spec, const AffineMap& deviation, double step);
double gamma1(const CoefficientSet& coeffs, const Policy& policy, double t, double x,
              const PsiSpec& spec, double deviation_value, double step);

// Gamma_1 as a quadratic in the deviation value v. It always vanishes at
// v = u; the other root is a stationary deviation value.
struct Gamma1Quadratic {
  double u = 0.0;        // base control value at (t, x)
  double lead = 0.0;     // (1/2) D^2 s2
  double slope_at_u = 0.0;  // d Gamma_1 / dv at v = u

  double at(double v) const {
    return (v - u) * (slope_at_u + lead * (v - u));
  }
  bool has_second_root() const { return lead != 0.0; }
  double second_root() const { return u - slope_at_u / lead; }
};

Gamma1Quadratic gamma1_quadratic(const CoefficientSet& coeffs, const Policy& policy,
                                 double t, double x, const PsiSpec& spec, double step);

// Pointwise first-order condition at time t: v*(x) maximizing the quadratic
// Gamma_1 in the deviation value, with a least-squares affine fit over the
// x grid.
struct FocPoint {
  double x = 0.0;
  double vstar = 0.0;
  double denominator = 0.0;  // D^2 s2(x); must be nonzero, negative for a max
};

struct FocSolve {
  std::vector<FocPoint> points;
  double alpha = 0.0;
  double beta = 0.0;
  double max_affine_residual = 0.0;  // max_x |v*(x) - fit(x)|
  double concavity_margin = 0.0;     // max_x D^2 s2(x); < 0 when concave
  double foc_residual = 0.0;         // max_x |d Gamma_1/dv| at v = fit(x)
};

FocSolve foc_solve_at(const MomentPolynomials& polys, const CoefficientValues& cv,
                      const PsiSpec& spec, std::span<const double> x_grid,
                      const SolverOptions& options);

FocSolve foc_solve_pointwise(const CoefficientSet& coeffs, const Policy& future_policy,
                             double t, std::span<const double> x_grid, const PsiSpec& spec,
                             const SolverOptions& options);

struct NodeDiagnostics {
  double t = 0.0;
  double foc_residual = 0.0;
  double affine_residual = 0.0;
  double concavity_margin = 0.0;
  int corrector_iters = 0;
  bool convexity_warning = false;
  bool non_affine_warning = false;
};

struct EquilibriumSolution {
  AffinePolicy policy;
  std::vector<NodeDiagnostics> diagnostics;

  double max_foc_residual() const;
  double max_affine_residual() const;
};

// Backward sweep over the time grid. At each node the moment maps are built
// from the already-fixed policy on the tail, with a predictor-corrector pass
// resolving the policy values on the current interval; the node's (alpha,
// beta) is the affine fit of the pointwise stationary values.
EquilibriumSolution solve_equilibrium_backward(const CoefficientSet& coeffs,
                                               const PsiSpec& spec,
                                               std::span<const double> time_grid,
                                               std::span<const double> x_grid,
                                               const SolverOptions& options);

// Constant-parameter mean-variance equilibrium
//   alpha = 0, beta(t) = (B / (gamma D^2)) e^{-A (T - t)} - F / D,
// sampled on the given time grid.
AffinePolicy closed_form_mv(const CoefficientSet& coeffs, double gamma,
                            std::span<const double> time_grid);

std::vector<double> uniform_grid(double lo, double hi, int count);
std::vector<double> chebyshev_grid(double lo, double hi, int count);

}  // namespace tic
