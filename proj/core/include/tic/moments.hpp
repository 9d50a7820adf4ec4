#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tic/coefficients.hpp"
#include "tic/policy.hpp"

namespace tic {

// Coefficients of the closed-loop dynamics dX = (p X + q) dt + (r X + s) dW
// obtained by substituting u = alpha x + beta into the controlled SDE.
struct ReducedCoefficients {
  double p, q, r, s;
};

ReducedCoefficients reduce_coefficients(const CoefficientValues& cv, const AffineMap& map);

inline constexpr int kMaxMomentOrder = 8;

// Generator of the raw-moment hierarchy m_k(t) = E[X_t^k]:
//   m_k' = k p m_k + k q m_{k-1} + (k(k-1)/2)(r^2 m_k + 2 r s m_{k-1} + s^2 m_{k-2}).
// Returns the (n+1)x(n+1) lower-triangular matrix M with m' = M m, row 0 zero.
Eigen::MatrixXd generator_matrix(double p, double q, double r, double s, int n);

// Linear map carrying raw-moment vectors forward: m(t_b) = phi * m(t_a).
struct MomentTransition {
  double t_a = 0.0;
  double t_b = 0.0;
  Eigen::MatrixXd phi;

  int order() const { return static_cast<int>(phi.rows()) - 1; }
};

// RK4 integration of phi' = M(tau) phi, phi(t_a) = I. Steps are split at
// coefficient-curve breakpoints, policy grid nodes and spike window edges so
// that no step straddles a kink or discontinuity of M. Extra cut points force
// additional splits (used to align partitions between runs being compared).
MomentTransition propagate_transition(const CoefficientSet& coeffs, const Policy& policy,
                                      double t_a, double t_b, int n, double step,
                                      std::span<const double> extra_cuts);
MomentTransition propagate_transition(const CoefficientSet& coeffs, const Policy& policy,
                                      double t_a, double t_b, int n, double step);

// Conditional mean and central moments; central[k] holds C_k for k = 2..n
// (central[0] = 1 and central[1] = 0 by convention).
struct CentralMoments {
  double mean = 0.0;
  std::vector<double> central;

  int order() const { return static_cast<int>(central.size()) - 1; }
};

// Binomial centering identity C_k = sum_j binom(k,j) m_j (-m_1)^{k-j}.
// Requires m_0 = 1.
CentralMoments raw_to_central(const Eigen::VectorXd& raw);

// The moment maps Y_k(t_a, x) = E[X_{t_b}^k | X_{t_a} = x] as degree-k
// polynomials in x; coefficients are the rows of the transition matrix.
class MomentPolynomials {
 public:
  explicit MomentPolynomials(Eigen::MatrixXd coef);

  int order() const { return static_cast<int>(coef_.rows()) - 1; }
  double value(int k, double x) const;
  double dx(int k, double x) const;
  double dxx(int k, double x) const;

  // (Y_0, ..., Y_n)(x): the raw-moment vector conditional on starting at x.
  Eigen::VectorXd raw_at(double x) const;

  const Eigen::MatrixXd& coefficients() const { return coef_; }

 private:
  Eigen::MatrixXd coef_;
};

MomentPolynomials moment_polynomials(const MomentTransition& transition);

// propagate -> evaluate at x -> centralize, from (t, x) to the horizon.
CentralMoments conditional_central_moments(const CoefficientSet& coeffs, const Policy& policy,
                                           double t, double x, int n, double step);

// Suggested RK4 step for a given horizon.
inline double default_ode_step(double horizon) { return horizon / 2048.0; }

}  // namespace tic
