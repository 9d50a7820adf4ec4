#include "tic/policy.hpp"

#include <algorithm>
#include <cmath>

#include "tic/errors.hpp"

namespace tic {

AffinePolicy::AffinePolicy(std::vector<double> grid, std::vector<double> alpha,
                           std::vector<double> beta)
    : grid_(std::move(grid)), alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (grid_.size() < 2) throw config_error("policy grid needs at least two nodes");
  if (alpha_.size() != grid_.size() || beta_.size() != grid_.size())
    throw config_error("policy alpha/beta arrays must match the grid length");
  if (grid_.front() != 0.0) throw config_error("policy grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1]))
      throw config_error("policy grid must be strictly increasing");
  }
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(alpha_[i]) || !std::isfinite(beta_[i]))
      throw config_error("policy coefficients must be finite");
  }
}

AffinePolicy AffinePolicy::constant(double horizon, double alpha, double beta) {
  return AffinePolicy({0.0, horizon}, {alpha, alpha}, {beta, beta});
}

AffineMap AffinePolicy::map_at(double t) const {
  if (t <= grid_.front()) return {alpha_.front(), beta_.front()};
  if (t >= grid_.back()) return {alpha_.back(), beta_.back()};
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - grid_[lo]) / (grid_[hi] - grid_[lo]);
  return {alpha_[lo] + w * (alpha_[hi] - alpha_[lo]),
          beta_[lo] + w * (beta_[hi] - beta_[lo])};
}

SpikePolicy::SpikePolicy(AffinePolicy base_policy, AffineMap dev, double t, double eps)
    : base(std::move(base_policy)), deviation(dev), start(t), width(eps) {
  if (width < 0.0) throw config_error("spike window width must be nonnegative");
  if (start < 0.0 || start + width > base.horizon())
    throw config_error("spike window must lie inside [0, horizon]");
  if (!std::isfinite(dev.alpha) || !std::isfinite(dev.beta))
    throw config_error("spike deviation map must be finite");
}

AffineMap policy_map_at(const Policy& policy, double t) {
  return std::visit([t](const auto& p) { return p.map_at(t); }, policy);
}

double policy_horizon(const Policy& policy) {
  return std::visit([](const auto& p) { return p.horizon(); }, policy);
}

namespace {

void grid_kinks(const AffinePolicy& p, double a, double b, std::vector<double>& out) {
  for (double t : p.grid()) {
    if (t > a && t < b) out.push_back(t);
  }
}

}  // namespace

std::vector<double> policy_kinks(const Policy& policy, double a, double b) {
  std::vector<double> out;
  if (const auto* affine = std::get_if<AffinePolicy>(&policy)) {
    grid_kinks(*affine, a, b, out);
  } else {
    const auto& spike = std::get<SpikePolicy>(policy);
    grid_kinks(spike.base, a, b, out);
    if (spike.width > 0.0) {
      for (double edge : {spike.start, spike.start + spike.width}) {
        if (edge > a && edge < b) out.push_back(edge);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DriftDiffusion policy_drift_diffusion(const CoefficientSet& coeffs, double t,
                                      double x, double u) {
  const CoefficientValues v = coeffs.eval(t);
  return {v.a * x + v.b * u + v.c, v.d * u + v.f};
}

}  // namespace tic
