#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tic/coefficients.hpp"
#include "tic/policy.hpp"

namespace tic {

// Terminal values of Euler-Maruyama paths, plus the configuration that
// produced them. Reproducible: identical (config, seed) gives identical
// terminal arrays regardless of thread count.
struct PathSample {
  std::uint64_t seed = 0;
  std::int64_t paths = 0;
  double step = 0.0;
  double t0 = 0.0;
  double x0 = 0.0;
  std::vector<double> terminal;
};

// Euler-Maruyama simulation of the controlled SDE from (t, x) to the horizon
// under the policy. The time grid is split at policy kinks and spike window
// edges; controls are evaluated at the left endpoint of each step. When a
// spike window is present the step must not exceed the window width.
PathSample simulate_terminal(const CoefficientSet& coeffs, const Policy& policy,
                             double t, double x, std::int64_t paths, double step,
                             std::uint64_t seed, int threads = 1);

struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Sample mean and central moments about the sample mean, with delta-method
// standard errors; central[k] holds the order-k estimate for k = 2..n.
struct SampleMoments {
  MomentEstimate mean;
  std::vector<MomentEstimate> central;

  int order() const { return static_cast<int>(central.size()) - 1; }
};

SampleMoments sample_central_moments(std::span<const double> values, int n);
SampleMoments sample_central_moments(const PathSample& sample, int n);

inline double default_sim_step(double horizon) { return horizon / 4096.0; }

}  // namespace tic
