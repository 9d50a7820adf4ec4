#include "tic/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tic/errors.hpp"

namespace tic {

namespace {

void check_time_grid(std::span<const double> grid, double horizon) {
  if (grid.size() < 2) throw config_error("time grid needs at least two nodes");
  if (grid.front() != 0.0 || grid.back() != horizon)
    throw config_error("time grid must cover [0, horizon]");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw config_error("time grid must be strictly increasing");
  }
}

struct AffineFit {
  double alpha, beta;
};

AffineFit fit_affine(std::span<const double> xs, std::span<const double> vs) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sxx = 0.0, sv = 0.0, sxv = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sxx += xs[i] * xs[i];
    sv += vs[i];
    sxv += xs[i] * vs[i];
  }
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) throw config_error("x grid does not determine an affine fit");
  const double alpha = (n * sxv - sx * sv) / det;
  return {alpha, (sv - alpha * sx) / n};
}

}  // namespace

PointExpansion point_expansion(const MomentPolynomials& polys, const PsiSpec& spec, double x) {
  PointExpansion pe;
  pe.moments = raw_to_central(polys.raw_at(x));
  pe.y1 = pe.moments.mean;
  pe.weights = adjoint_weights(spec, pe.moments);
  const int n = spec.max_order();
  pe.s1 = 0.0;
  pe.s2 = 0.0;
  for (int k = 1; k <= n; ++k) {
    pe.s1 += pe.weights(k) * polys.dx(k, x);
    pe.s2 += pe.weights(k) * polys.dxx(k, x);
  }
  return pe;
}

namespace {

double gamma1_from(const PointExpansion& pe, const CoefficientValues& cv, double u,
                   double v) {
  const double db = cv.b * (v - u);
  const double sig_v = cv.d * v + cv.f;
  const double sig_u = cv.d * u + cv.f;
  const double dsig2 = sig_v * sig_v - sig_u * sig_u;
  return db * pe.s1 + 0.5 * dsig2 * pe.s2;
}

}  // namespace

double gamma1(const CoefficientSet& coeffs, const Policy& policy, double t, double x,
              const PsiSpec& spec, const AffineMap& deviation, double step) {
  const MomentTransition phi =
      propagate_transition(coeffs, policy, t, coeffs.horizon, spec.max_order(), step);
  const MomentPolynomials polys = moment_polynomials(phi);
  const PointExpansion pe = point_expansion(polys, spec, x);
  return gamma1_from(pe, coeffs.eval(t), policy_control(policy, t, x), deviation(x));
}

double gamma1(const CoefficientSet& coeffs, const Policy& policy, double t, double x,
              const PsiSpec& spec, double deviation_value, double step) {
  return gamma1(coeffs, policy, t, x, spec, AffineMap{0.0, deviation_value}, step);
}

Gamma1Quadratic gamma1_quadratic(const CoefficientSet& coeffs, const Policy& policy,
                                 double t, double x, const PsiSpec& spec, double step) {
  const MomentTransition phi =
      propagate_transition(coeffs, policy, t, coeffs.horizon, spec.max_order(), step);
  const MomentPolynomials polys = moment_polynomials(phi);
  const PointExpansion pe = point_expansion(polys, spec, x);
  const CoefficientValues cv = coeffs.eval(t);

  Gamma1Quadratic quad;
  quad.u = policy_control(policy, t, x);
  quad.lead = 0.5 * cv.d * cv.d * pe.s2;
  // d Gamma_1 / dv = B s1 + (D^2 v + D F) s2, at v = u.
  quad.slope_at_u = cv.b * pe.s1 + (cv.d * cv.d * quad.u + cv.d * cv.f) * pe.s2;
  return quad;
}

FocSolve foc_solve_at(const MomentPolynomials& polys, const CoefficientValues& cv,
                      const PsiSpec& spec, std::span<const double> x_grid,
                      const SolverOptions& options) {
  if (x_grid.size() < 2) throw config_error("x grid needs at least two points");

  FocSolve out;
  out.points.reserve(x_grid.size());
  std::vector<double> vstars(x_grid.size());
  out.concavity_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    const PointExpansion pe = point_expansion(polys, spec, x);
    const double den = cv.d * cv.d * pe.s2;
    if (std::abs(den) < options.degenerate_denominator)
      throw numeric_error("degenerate first-order condition: D^2 sum w_k Y_k'' vanishes");
    const double vstar = -(cv.b * pe.s1 + cv.d * cv.f * pe.s2) / den;
    if (!std::isfinite(vstar)) throw numeric_error("first-order condition produced nonfinite value");
    out.points.push_back({x, vstar, den});
    vstars[i] = vstar;
    out.concavity_margin = std::max(out.concavity_margin, den);
  }

  const AffineFit fit = fit_affine(x_grid, vstars);
  out.alpha = fit.alpha;
  out.beta = fit.beta;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double fitted = fit.alpha * x_grid[i] + fit.beta;
    const double res = std::abs(vstars[i] - fitted);
    out.max_affine_residual = std::max(out.max_affine_residual, res);
    // The derivative of the quadratic is linear, so |dGamma_1/dv| at the
    // fitted value is |den| * |fitted - v*|.
    out.foc_residual = std::max(out.foc_residual, std::abs(out.points[i].denominator) * res);
  }
  return out;
}

FocSolve foc_solve_pointwise(const CoefficientSet& coeffs, const Policy& future_policy,
                             double t, std::span<const double> x_grid, const PsiSpec& spec,
                             const SolverOptions& options) {
  const double step = options.resolved_step(coeffs.horizon);
  const MomentTransition phi =
      propagate_transition(coeffs, future_policy, t, coeffs.horizon, spec.max_order(), step);
  return foc_solve_at(moment_polynomials(phi), coeffs.eval(t), spec, x_grid, options);
}

double EquilibriumSolution::max_foc_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics) m = std::max(m, d.foc_residual);
  return m;
}

double EquilibriumSolution::max_affine_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics) m = std::max(m, d.affine_residual);
  return m;
}

EquilibriumSolution solve_equilibrium_backward(const CoefficientSet& coeffs,
                                               const PsiSpec& spec,
                                               std::span<const double> time_grid,
                                               std::span<const double> x_grid,
                                               const SolverOptions& options) {
  coeffs.validate();
  check_time_grid(time_grid, coeffs.horizon);
  for (double t : time_grid) {
    if (std::abs(coeffs.D(t)) < 1e-12)
      throw config_error("coefficient D vanishes on the solver grid");
  }

  const int n = spec.max_order();
  const double step = options.resolved_step(coeffs.horizon);
  const std::size_t count = time_grid.size();
  std::vector<double> grid(time_grid.begin(), time_grid.end());
  std::vector<double> alpha(count, 0.0), beta(count, 0.0);
  std::vector<NodeDiagnostics> diag(count);

  // Terminal node: Y_k(T, x) = x^k.
  const MomentPolynomials terminal(Eigen::MatrixXd::Identity(n + 1, n + 1));
  {
    const FocSolve foc =
        foc_solve_at(terminal, coeffs.eval(coeffs.horizon), spec, x_grid, options);
    const std::size_t i = count - 1;
    alpha[i] = foc.alpha;
    beta[i] = foc.beta;
    diag[i] = {grid[i], foc.foc_residual, foc.max_affine_residual, foc.concavity_margin,
               0, foc.concavity_margin >= 0.0,
               foc.max_affine_residual > options.affine_residual_threshold};
  }

  Eigen::MatrixXd phi_tail = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (std::size_t ii = count - 1; ii-- > 0;) {
    const std::size_t i = ii;
    alpha[i] = alpha[i + 1];
    beta[i] = beta[i + 1];

    FocSolve foc;
    int iters = 0;
    double change = std::numeric_limits<double>::infinity();
    while (true) {
      const AffinePolicy iterate(grid, alpha, beta);
      const MomentTransition seg =
          propagate_transition(coeffs, iterate, grid[i], grid[i + 1], n, step);
      const MomentPolynomials polys(Eigen::MatrixXd(phi_tail * seg.phi));
      foc = foc_solve_at(polys, coeffs.eval(grid[i]), spec, x_grid, options);
      change = std::max(std::abs(foc.alpha - alpha[i]), std::abs(foc.beta - beta[i]));
      alpha[i] = foc.alpha;
      beta[i] = foc.beta;
      ++iters;
      if (iters >= 2 && change <= options.corrector_tol) break;
      if (iters >= options.max_corrector_iters) {
        if (change > options.corrector_tol)
          throw numeric_error("backward sweep corrector did not converge at t = " +
                              std::to_string(grid[i]));
        break;
      }
    }

    diag[i] = {grid[i], foc.foc_residual, foc.max_affine_residual, foc.concavity_margin,
               iters, foc.concavity_margin >= 0.0,
               foc.max_affine_residual > options.affine_residual_threshold};

    const AffinePolicy fixed(grid, alpha, beta);
    const MomentTransition seg =
        propagate_transition(coeffs, fixed, grid[i], grid[i + 1], n, step);
    phi_tail = phi_tail * seg.phi;
  }

  return {AffinePolicy(grid, std::move(alpha), std::move(beta)), std::move(diag)};
}

AffinePolicy closed_form_mv(const CoefficientSet& coeffs, double gamma,
                            std::span<const double> time_grid) {
  coeffs.validate();
  if (!coeffs.all_constant())
    throw config_error("closed-form mean-variance policy requires constant coefficients");
  if (!(gamma > 0.0)) throw config_error("mean-variance gamma must be positive");
  check_time_grid(time_grid, coeffs.horizon);
  const double a = coeffs.A(0.0), b = coeffs.B(0.0), d = coeffs.D(0.0), f = coeffs.F(0.0);
  if (std::abs(d) < 1e-12) throw config_error("closed-form mean-variance policy requires D != 0");

  std::vector<double> grid(time_grid.begin(), time_grid.end());
  std::vector<double> alpha(grid.size(), 0.0);
  std::vector<double> beta(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    beta[i] = (b / (gamma * d * d)) * std::exp(-a * (coeffs.horizon - grid[i])) - f / d;
  return AffinePolicy(std::move(grid), std::move(alpha), std::move(beta));
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 2) throw config_error("grid needs at least two points");
  if (!(hi > lo)) throw config_error("grid bounds must satisfy lo < hi");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return out;
}

std::vector<double> chebyshev_grid(double lo, double hi, int count) {
  if (count < 2) throw config_error("grid needs at least two points");
  if (!(hi > lo)) throw config_error("grid bounds must satisfy lo < hi");
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = mid - half * std::cos(std::numbers::pi * i / (count - 1));
  // Pin the endpoints exactly; ascending by construction.
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace tic
