#include "tic/objective.hpp"

#include <cmath>

#include "tic/errors.hpp"

namespace tic {

namespace {

double binom(int k, int j) {
  double acc = 1.0;
  for (int i = 1; i <= j; ++i) acc = acc * (k - j + i) / i;
  return acc;
}

}  // namespace

PsiSpec::PsiSpec(Kind kind, std::vector<double> weights)
    : kind_(kind), weights_(std::move(weights)) {
  if (weights_.empty()) throw config_error("objective needs at least the order-2 weight");
  if (max_order() > kMaxMomentOrder) throw config_error("objective order capped at 8");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw config_error("objective weights must be finite");
  }
}

PsiSpec PsiSpec::mean_variance(double gamma) {
  if (!(gamma > 0.0)) throw config_error("mean-variance gamma must be positive");
  return PsiSpec(Kind::MeanVariance, {-0.5 * gamma});
}

PsiSpec PsiSpec::mvsk(double gamma2, double gamma3, double gamma4) {
  return PsiSpec(Kind::Mvsk, {-gamma2 / 2.0, gamma3 / 6.0, -gamma4 / 24.0});
}

PsiSpec PsiSpec::polynomial(std::vector<double> coefficients_from_order2) {
  return PsiSpec(Kind::Polynomial, std::move(coefficients_from_order2));
}

double PsiSpec::weight(int k) const {
  if (k < 2 || k > max_order()) return 0.0;
  return weights_[static_cast<std::size_t>(k - 2)];
}

PsiSpec PsiSpec::with_max_order(int n) const {
  if (n < max_order()) throw config_error("max_moment below the objective's own order");
  if (n > kMaxMomentOrder) throw config_error("objective order capped at 8");
  PsiSpec out = *this;
  out.weights_.resize(static_cast<std::size_t>(n - 1), 0.0);
  return out;
}

double psi_eval(const PsiSpec& spec, double /*t*/, std::span<const double> central) {
  const int n = spec.max_order();
  if (static_cast<int>(central.size()) < n + 1)
    throw config_error("psi evaluation needs central moments up to the objective order");
  double acc = 0.0;
  for (int k = 2; k <= n; ++k) acc += spec.weight(k) * central[static_cast<std::size_t>(k)];
  return acc;
}

double psi_eval(const PsiSpec& spec, double t, const CentralMoments& moments) {
  return psi_eval(spec, t, std::span<const double>(moments.central));
}

double evaluate_J(const CoefficientSet& coeffs, const Policy& policy, double t,
                  double x, const PsiSpec& spec, double step) {
  const CentralMoments m =
      conditional_central_moments(coeffs, policy, t, x, spec.max_order(), step);
  return m.mean + psi_eval(spec, t, m);
}

Eigen::VectorXd adjoint_weights(const PsiSpec& spec, double y1,
                                std::span<const double> central) {
  const int n = spec.max_order();
  if (static_cast<int>(central.size()) < n + 1)
    throw config_error("adjoint weights need central moments up to the objective order");

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  double w1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double c_km1 = (k - 1 >= 2) ? central[static_cast<std::size_t>(k - 1)] : 0.0;
    w1 += spec.weight(k) * k * (std::pow(-y1, k - 1) - c_km1);
  }
  w(1) = w1;
  for (int j = 2; j <= n; ++j) {
    double acc = 0.0;
    for (int k = j; k <= n; ++k)
      acc += spec.weight(k) * binom(k, j) * std::pow(-y1, k - j);
    w(j) = acc;
  }
  return w;
}

Eigen::VectorXd adjoint_weights(const PsiSpec& spec, const CentralMoments& moments) {
  return adjoint_weights(spec, moments.mean, std::span<const double>(moments.central));
}

}  // namespace tic
