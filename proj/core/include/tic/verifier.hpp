#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tic/equilibrium.hpp"
#include "tic/moments.hpp"
#include "tic/objective.hpp"
#include "tic/policy.hpp"

namespace tic {

struct VerifyTolerances {
  double tau1 = 1e-8;  // |Gamma_1| below this counts as stationary
  double tau2 = 1e-6;  // |Gamma_2| below this counts as noise
};

// Default window-width ladder {1e-2, 5e-3, 2.5e-3, 1.25e-3} * horizon.
std::vector<double> default_epsilon_ladder(double horizon);

// Exact spike-deviation gain g(eps) = J(t, x; spike) - J(t, x; base), both
// sides by exact moment propagation with matching step partitions, so a
// deviation identical to the base map yields exactly zero.
double exact_spike_gain(const CoefficientSet& coeffs, const AffinePolicy& base,
                        const PsiSpec& spec, const AffineMap& deviation, double t,
                        double x, double eps, double step);

// Least-squares fit of g(eps) = g1 eps + g2 eps^2 + g3 eps^3 (no constant
// term) over a decreasing ladder of at least three widths.
struct ExpansionFit {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double residual = 0.0;  // max absolute fit error over the ladder
};

ExpansionFit fit_expansion(std::span<const double> eps, std::span<const double> gains);

enum class DeviationClass { WorseFirstOrder, WorseSecondOrder, Profitable, Inconclusive };
std::string_view to_string(DeviationClass cls);

struct ExpansionReport {
  double gamma1_analytic = 0.0;
  double gamma1_fit = 0.0;
  double gamma2_fit = 0.0;
  double gamma3_fit = 0.0;
  double fit_residual = 0.0;
  double smallest_gain = 0.0;  // raw gain at the smallest ladder width
  bool gamma1_consistent = true;
  DeviationClass classification = DeviationClass::Inconclusive;
};

// Gains on the ladder, cubic fit, and sign-based classification:
//   Gamma_1 < -tau1                 -> worse-first-order
//   |Gamma_1| <= tau1, Gamma_2 < -tau2 -> worse-second-order
//   Gamma_1 > tau1 or (|Gamma_1| <= tau1, Gamma_2 > tau2) -> profitable
//   otherwise                       -> inconclusive
// The analytic Gamma_1 drives the first-order branches; if it disagrees with
// the fitted value beyond max(1e-6, 1e-4 |Gamma_1|) the cell is inconclusive.
ExpansionReport classify_deviation(const CoefficientSet& coeffs, const AffinePolicy& base,
                                   const PsiSpec& spec, double t, double x,
                                   const AffineMap& deviation,
                                   std::span<const double> ladder, double step,
                                   const VerifyTolerances& tols);

struct SweepGrid {
  std::vector<double> times;
  std::vector<double> xs;
  std::vector<double> deviation_alphas;
  std::vector<double> deviation_beta_offsets;  // relative to the policy's beta(t)
  std::vector<double> ladder;
};

struct SweepCell {
  double t = 0.0;
  double x = 0.0;
  double alpha_v = 0.0;
  double beta_v = 0.0;
  ExpansionReport report;
};

enum class SweepVerdict { StrongCandidate, NotStrong, Inconclusive };
std::string_view to_string(SweepVerdict verdict);

struct SweepResult {
  SweepVerdict verdict = SweepVerdict::Inconclusive;
  std::vector<SweepCell> cells;       // sorted by (t, x, alpha_v, beta_v)
  std::vector<SweepCell> witnesses;   // profitable cells, same order
  std::size_t inconclusive_count = 0;
};

// Classifies every deviation cell over the grid (self-deviations excluded).
// Any profitable cell makes the verdict not-strong; otherwise any
// inconclusive cell makes it inconclusive; otherwise strong-candidate.
SweepResult strong_equilibrium_sweep(const CoefficientSet& coeffs,
                                     const AffinePolicy& policy, const PsiSpec& spec,
                                     const SweepGrid& grid, double step,
                                     const VerifyTolerances& tols, int threads = 1);

// Monte Carlo estimate of the same spike gain with common random numbers;
// the standard error comes from 32 path batches.
struct McGain {
  double gain = 0.0;
  double standard_error = 0.0;
};

McGain mc_cross_check(const CoefficientSet& coeffs, const AffinePolicy& policy,
                      const PsiSpec& spec, double t, double x, const AffineMap& deviation,
                      double eps, std::int64_t paths, double sim_step, std::uint64_t seed,
                      int threads = 1);

}  // namespace tic
