#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tic/moments.hpp"

namespace tic {

// Moment preference psi(t, C_2, ..., C_n), linear in the central moments.
// Built-in kinds:
//   mean-variance: psi = -(gamma/2) C_2
//   mvsk:          psi = -(gamma2/2) C_2 + (gamma3/6) C_3 - (gamma4/24) C_4
//   polynomial:    psi = sum_k c_k C_k, k = 2..n
// The time argument is accepted throughout but unused by the built-ins.
class PsiSpec {
 public:
  enum class Kind { MeanVariance, Mvsk, Polynomial };

  static PsiSpec mean_variance(double gamma);
  static PsiSpec mvsk(double gamma2, double gamma3, double gamma4);
  static PsiSpec polynomial(std::vector<double> coefficients_from_order2);

  Kind kind() const { return kind_; }
  int max_order() const { return static_cast<int>(weights_.size()) + 1; }

  // psi_k = d psi / d C_k for k in [2, max_order()].
  double weight(int k) const;

  // Pads zero-weight orders up to n >= current max_order().
  PsiSpec with_max_order(int n) const;

 private:
  PsiSpec(Kind kind, std::vector<double> weights);

  Kind kind_;
  std::vector<double> weights_;  // index 0 corresponds to C_2
};

// psi value given central moments (central[k] = C_k, k = 2..n).
double psi_eval(const PsiSpec& spec, double t, std::span<const double> central);
double psi_eval(const PsiSpec& spec, double t, const CentralMoments& moments);

// Objective J(t, x; policy) = Y_1(t, x) + psi(t, C_2..C_n) by exact moment
// propagation. Supports spike policies.
double evaluate_J(const CoefficientSet& coeffs, const Policy& policy, double t,
                  double x, const PsiSpec& spec, double step);

// Partials of W(m) = m_1 + psi(C(m)) with respect to the raw moments m_j,
// evaluated at (Y_1, C_2..C_n):
//   w_1 = 1 + sum_{k>=2} psi_k k [(-Y_1)^{k-1} - C_{k-1}]   (C_1 = 0)
//   w_j = sum_{k>=j} psi_k binom(k, j) (-Y_1)^{k-j},  j >= 2.
// Entry 0 is unused and set to zero.
Eigen::VectorXd adjoint_weights(const PsiSpec& spec, double y1,
                                std::span<const double> central);
Eigen::VectorXd adjoint_weights(const PsiSpec& spec, const CentralMoments& moments);

}  // namespace tic
