#include "tic/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tic/errors.hpp"

namespace tic {

namespace {

// binom(k, j) for k <= 2 * kMaxMomentOrder (delta-method SEs need 2n).
double binom(int k, int j) {
  static const auto table = [] {
    constexpr int size = 2 * kMaxMomentOrder + 1;
    std::array<std::array<double, size>, size> t{};
    for (int k = 0; k < size; ++k) {
      t[k][0] = 1.0;
      for (int j = 1; j <= k; ++j)
        t[k][j] = t[k - 1][j - 1] + (j <= k - 1 ? t[k - 1][j] : 0.0);
    }
    return t;
  }();
  return table[k][j];
}

void check_order(int n) {
  if (n < 1) throw config_error("moment order must be at least 1");
  if (n > kMaxMomentOrder) throw config_error("moment order capped at 8");
}

// Lower-triangular product out = a * b, accumulating in ascending column
// order so that results for low orders do not depend on the matrix size.
Eigen::MatrixXd tri_multiply(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int k = j; k <= i; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

struct SegmentMap {
  bool use_deviation = false;
  AffineMap deviation;
  const AffinePolicy* base = nullptr;

  AffineMap at(double t) const { return use_deviation ? deviation : base->map_at(t); }
};

SegmentMap segment_map(const Policy& policy, double mid) {
  SegmentMap seg;
  if (const auto* affine = std::get_if<AffinePolicy>(&policy)) {
    seg.base = affine;
  } else {
    const auto& spike = std::get<SpikePolicy>(policy);
    seg.base = &spike.base;
    if (spike.in_window(mid)) {
      seg.use_deviation = true;
      seg.deviation = spike.deviation;
    }
  }
  return seg;
}

}  // namespace

ReducedCoefficients reduce_coefficients(const CoefficientValues& cv, const AffineMap& map) {
  return {cv.a + cv.b * map.alpha, cv.b * map.beta + cv.c, cv.d * map.alpha,
          cv.d * map.beta + cv.f};
}

Eigen::MatrixXd generator_matrix(double p, double q, double r, double s, int n) {
  check_order(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double pairs = kk * (kk - 1.0) / 2.0;
    m(k, k) = kk * p + pairs * r * r;
    m(k, k - 1) = kk * q + 2.0 * pairs * r * s;
    if (k >= 2) m(k, k - 2) = pairs * s * s;
  }
  return m;
}

MomentTransition propagate_transition(const CoefficientSet& coeffs, const Policy& policy,
                                      double t_a, double t_b, int n, double step,
                                      std::span<const double> extra_cuts) {
  check_order(n);
  if (!(step > 0.0)) throw config_error("ode step must be positive");
  if (t_a < 0.0 || t_b > coeffs.horizon || t_a > t_b)
    throw domain_error("transition interval must satisfy 0 <= t_a <= t_b <= horizon");

  MomentTransition result;
  result.t_a = t_a;
  result.t_b = t_b;
  result.phi = Eigen::MatrixXd::Identity(n + 1, n + 1);
  if (t_a == t_b) return result;

  // Segment boundaries: interval ends, coefficient kinks, policy kinks.
  std::vector<double> cuts = coeffs.kinks_between(t_a, t_b);
  {
    std::vector<double> pk = policy_kinks(policy, t_a, t_b);
    cuts.insert(cuts.end(), pk.begin(), pk.end());
  }
  for (double c : extra_cuts) {
    if (c > t_a && c < t_b) cuts.push_back(c);
  }
  cuts.push_back(t_a);
  cuts.push_back(t_b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Eigen::MatrixXd phi = result.phi;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double s0 = cuts[seg];
    const double s1 = cuts[seg + 1];
    const SegmentMap map = segment_map(policy, 0.5 * (s0 + s1));
    const auto gen = [&](double tau) {
      const ReducedCoefficients rc = reduce_coefficients(coeffs.eval(tau), map.at(tau));
      return generator_matrix(rc.p, rc.q, rc.r, rc.s, n);
    };

    const int nsteps = std::max<int>(1, static_cast<int>(std::ceil((s1 - s0) / step - 1e-12)));
    const double h = (s1 - s0) / nsteps;
    for (int i = 0; i < nsteps; ++i) {
      const double tau = s0 + i * h;
      const Eigen::MatrixXd k1 = tri_multiply(gen(tau), phi);
      const Eigen::MatrixXd k2 = tri_multiply(gen(tau + 0.5 * h), phi + 0.5 * h * k1);
      const Eigen::MatrixXd k3 = tri_multiply(gen(tau + 0.5 * h), phi + 0.5 * h * k2);
      const Eigen::MatrixXd k4 = tri_multiply(gen(tau + h), phi + h * k3);
      phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  if (!phi.allFinite()) throw numeric_error("moment transition produced nonfinite values");
  result.phi = std::move(phi);
  return result;
}

MomentTransition propagate_transition(const CoefficientSet& coeffs, const Policy& policy,
                                      double t_a, double t_b, int n, double step) {
  return propagate_transition(coeffs, policy, t_a, t_b, n, step,
                              std::span<const double>{});
}

CentralMoments raw_to_central(const Eigen::VectorXd& raw) {
  const int n = static_cast<int>(raw.size()) - 1;
  if (n < 1) throw domain_error("raw moment vector must contain m_0 and m_1");
  if (std::abs(raw(0) - 1.0) > 1e-9)
    throw domain_error("raw moment vector must have m_0 = 1");

  CentralMoments out;
  out.mean = raw(1);
  out.central.assign(n + 1, 0.0);
  out.central[0] = 1.0;
  const double neg_mean = -raw(1);
  for (int k = 2; k <= n; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j)
      acc += binom(k, j) * raw(j) * std::pow(neg_mean, k - j);
    out.central[k] = acc;
  }
  return out;
}

MomentPolynomials::MomentPolynomials(Eigen::MatrixXd coef) : coef_(std::move(coef)) {}

double MomentPolynomials::value(int k, double x) const {
  double acc = 0.0;
  for (int j = k; j >= 0; --j) acc = acc * x + coef_(k, j);
  return acc;
}

double MomentPolynomials::dx(int k, double x) const {
  double acc = 0.0;
  for (int j = k; j >= 1; --j) acc = acc * x + j * coef_(k, j);
  return acc;
}

double MomentPolynomials::dxx(int k, double x) const {
  double acc = 0.0;
  for (int j = k; j >= 2; --j) acc = acc * x + j * (j - 1) * coef_(k, j);
  return acc;
}

Eigen::VectorXd MomentPolynomials::raw_at(double x) const {
  const int n = order();
  Eigen::VectorXd raw(n + 1);
  for (int k = 0; k <= n; ++k) raw(k) = value(k, x);
  return raw;
}

MomentPolynomials moment_polynomials(const MomentTransition& transition) {
  return MomentPolynomials(transition.phi);
}

CentralMoments conditional_central_moments(const CoefficientSet& coeffs, const Policy& policy,
                                           double t, double x, int n, double step) {
  const MomentTransition phi =
      propagate_transition(coeffs, policy, t, coeffs.horizon, n, step);
  return raw_to_central(moment_polynomials(phi).raw_at(x));
}

}  // namespace tic
