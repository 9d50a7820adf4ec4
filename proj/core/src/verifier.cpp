#include "tic/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "tic/errors.hpp"
#include "tic/parallel.hpp"
#include "tic/rng.hpp"
#include "tic/simulate.hpp"

namespace tic {

namespace {

void check_ladder(std::span<const double> ladder) {
  if (ladder.size() < 3) throw config_error("epsilon ladder needs at least three levels");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw config_error("epsilon ladder must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1]))
      throw config_error("epsilon ladder must be strictly decreasing");
  }
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i] / ladder[i - 1] > 0.95)
      throw config_error("epsilon ladder levels too close for a stable fit");
  }
}

double objective_value(const MomentPolynomials& polys, const PsiSpec& spec, double t,
                       double x) {
  const CentralMoments m = raw_to_central(polys.raw_at(x));
  return m.mean + psi_eval(spec, t, m);
}

double gamma1_mismatch_bound(double gamma1_analytic) {
  return std::max(1e-6, 1e-4 * std::abs(gamma1_analytic));
}

DeviationClass classify_from(double gamma1_analytic, double gamma2_fit, bool consistent,
                             const VerifyTolerances& tols) {
  if (!consistent) return DeviationClass::Inconclusive;
  if (gamma1_analytic < -tols.tau1) return DeviationClass::WorseFirstOrder;
  if (gamma1_analytic > tols.tau1) return DeviationClass::Profitable;
  if (gamma2_fit < -tols.tau2) return DeviationClass::WorseSecondOrder;
  if (gamma2_fit > tols.tau2) return DeviationClass::Profitable;
  return DeviationClass::Inconclusive;
}

}  // namespace

std::vector<double> default_epsilon_ladder(double horizon) {
  return {1e-2 * horizon, 5e-3 * horizon, 2.5e-3 * horizon, 1.25e-3 * horizon};
}

double exact_spike_gain(const CoefficientSet& coeffs, const AffinePolicy& base,
                        const PsiSpec& spec, const AffineMap& deviation, double t,
                        double x, double eps, double step) {
  if (eps < 0.0) throw config_error("spike window width must be nonnegative");
  if (t < 0.0 || t + eps > coeffs.horizon)
    throw config_error("spike window must fit inside [t, horizon]");

  const int n = spec.max_order();
  const SpikePolicy spike(base, deviation, t, eps);
  const MomentTransition phi_spike =
      propagate_transition(coeffs, spike, t, coeffs.horizon, n, step);
  // Base run with the window edges as forced cuts: identical partitions make
  // a deviation equal to the base map cancel exactly.
  const double edges[] = {t, t + eps};
  const MomentTransition phi_base = propagate_transition(
      coeffs, base, t, coeffs.horizon, n, step, std::span<const double>(edges, 2));

  const double j_spike = objective_value(moment_polynomials(phi_spike), spec, t, x);
  const double j_base = objective_value(moment_polynomials(phi_base), spec, t, x);
  return j_spike - j_base;
}

ExpansionFit fit_expansion(std::span<const double> eps, std::span<const double> gains) {
  check_ladder(eps);
  if (gains.size() != eps.size())
    throw config_error("expansion fit needs one gain per ladder level");
  for (double g : gains) {
    if (!std::isfinite(g)) throw numeric_error("expansion fit given nonfinite gain");
  }

  // Scale by the largest width so the design stays well conditioned.
  const double eps0 = eps[0];
  const std::size_t rows = eps.size();
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd rhs(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double r = eps[i] / eps0;
    design(i, 0) = r;
    design(i, 1) = r * r;
    design(i, 2) = r * r * r;
    rhs(i) = gains[i];
  }
  const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(rhs);

  ExpansionFit fit;
  fit.gamma1 = sol(0) / eps0;
  fit.gamma2 = sol(1) / (eps0 * eps0);
  fit.gamma3 = sol(2) / (eps0 * eps0 * eps0);
  const Eigen::VectorXd err = design * sol - rhs;
  fit.residual = err.cwiseAbs().maxCoeff();
  return fit;
}

std::string_view to_string(DeviationClass cls) {
  switch (cls) {
    case DeviationClass::WorseFirstOrder: return "worse-first-order";
    case DeviationClass::WorseSecondOrder: return "worse-second-order";
    case DeviationClass::Profitable: return "profitable";
    case DeviationClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string_view to_string(SweepVerdict verdict) {
  switch (verdict) {
    case SweepVerdict::StrongCandidate: return "strong-candidate";
    case SweepVerdict::NotStrong: return "not-strong";
    case SweepVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ExpansionReport classify_deviation(const CoefficientSet& coeffs, const AffinePolicy& base,
                                   const PsiSpec& spec, double t, double x,
                                   const AffineMap& deviation,
                                   std::span<const double> ladder, double step,
                                   const VerifyTolerances& tols) {
  check_ladder(ladder);
  if (t + ladder.front() > coeffs.horizon)
    throw config_error("largest epsilon ladder window does not fit before the horizon");

  std::vector<double> gains(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i)
    gains[i] = exact_spike_gain(coeffs, base, spec, deviation, t, x, ladder[i], step);

  ExpansionReport report;
  report.gamma1_analytic = gamma1(coeffs, Policy(base), t, x, spec, deviation, step);
  const ExpansionFit fit = fit_expansion(ladder, gains);
  report.gamma1_fit = fit.gamma1;
  report.gamma2_fit = fit.gamma2;
  report.gamma3_fit = fit.gamma3;
  report.fit_residual = fit.residual;
  report.smallest_gain = gains.back();
  report.gamma1_consistent = std::abs(report.gamma1_analytic - report.gamma1_fit) <=
                             gamma1_mismatch_bound(report.gamma1_analytic);
  report.classification =
      classify_from(report.gamma1_analytic, report.gamma2_fit, report.gamma1_consistent, tols);
  return report;
}

SweepResult strong_equilibrium_sweep(const CoefficientSet& coeffs,
                                     const AffinePolicy& policy, const PsiSpec& spec,
                                     const SweepGrid& grid, double step,
                                     const VerifyTolerances& tols, int threads) {
  if (grid.times.empty() || grid.xs.empty() || grid.deviation_alphas.empty() ||
      grid.deviation_beta_offsets.empty())
    throw config_error("sweep grids must be nonempty");
  check_ladder(grid.ladder);
  for (double t : grid.times) {
    if (t < 0.0 || t + grid.ladder.front() > coeffs.horizon)
      throw config_error("sweep window does not fit inside [0, horizon]");
  }

  const int n = spec.max_order();
  const std::size_t n_maps = grid.deviation_alphas.size() * grid.deviation_beta_offsets.size();

  SweepResult result;
  for (double t : grid.times) {
    const double horizon = coeffs.horizon;
    const AffineMap base_map = policy.map_at(t);
    const CoefficientValues cv = coeffs.eval(t);

    const MomentTransition phi_base =
        propagate_transition(coeffs, policy, t, horizon, n, step);
    const MomentPolynomials polys_base = moment_polynomials(phi_base);

    std::vector<PointExpansion> expansions;
    std::vector<double> j_base(grid.xs.size());
    expansions.reserve(grid.xs.size());
    for (std::size_t xi = 0; xi < grid.xs.size(); ++xi) {
      expansions.push_back(point_expansion(polys_base, spec, grid.xs[xi]));
      const PointExpansion& pe = expansions.back();
      j_base[xi] = pe.y1 + psi_eval(spec, t, pe.moments);
    }

    // Base transitions from each window end to the horizon, shared by all
    // deviation maps at this anchor time.
    std::vector<Eigen::MatrixXd> tails(grid.ladder.size());
    for (std::size_t ei = 0; ei < grid.ladder.size(); ++ei) {
      tails[ei] =
          propagate_transition(coeffs, policy, t + grid.ladder[ei], horizon, n, step).phi;
    }

    std::vector<std::vector<SweepCell>> per_map(n_maps);
    std::string cell_failure;
    std::mutex failure_mutex;
    parallel_for(static_cast<std::int64_t>(n_maps), threads,
                 [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t mi = begin; mi < end; ++mi) {
        const double alpha_v =
            grid.deviation_alphas[static_cast<std::size_t>(mi) /
                                  grid.deviation_beta_offsets.size()];
        const double beta_v =
            base_map.beta + grid.deviation_beta_offsets[static_cast<std::size_t>(mi) %
                                                        grid.deviation_beta_offsets.size()];
        // Degenerate self-deviation: excluded from the sweep.
        if (std::abs(alpha_v - base_map.alpha) <= 1e-12 &&
            std::abs(beta_v - base_map.beta) <= 1e-12 * std::max(1.0, std::abs(base_map.beta)))
          continue;

        const AffineMap dev{alpha_v, beta_v};
        try {
          // One window transition per ladder width covers every anchor x.
          std::vector<MomentPolynomials> spiked;
          spiked.reserve(grid.ladder.size());
          const Policy window_policy = AffinePolicy::constant(horizon, alpha_v, beta_v);
          for (std::size_t ei = 0; ei < grid.ladder.size(); ++ei) {
            const MomentTransition window = propagate_transition(
                coeffs, window_policy, t, t + grid.ladder[ei], n, step);
            spiked.emplace_back(Eigen::MatrixXd(tails[ei] * window.phi));
          }

          for (std::size_t xi = 0; xi < grid.xs.size(); ++xi) {
            const double x = grid.xs[xi];
            std::vector<double> gains(grid.ladder.size());
            for (std::size_t ei = 0; ei < grid.ladder.size(); ++ei)
              gains[ei] = objective_value(spiked[ei], spec, t, x) - j_base[xi];

            const PointExpansion& pe = expansions[xi];
            const double u = base_map(x);
            const double v = dev(x);
            const double db = cv.b * (v - u);
            const double dsig2 =
                (cv.d * v + cv.f) * (cv.d * v + cv.f) - (cv.d * u + cv.f) * (cv.d * u + cv.f);

            ExpansionReport report;
            report.gamma1_analytic = db * pe.s1 + 0.5 * dsig2 * pe.s2;
            const ExpansionFit fit = fit_expansion(grid.ladder, gains);
            report.gamma1_fit = fit.gamma1;
            report.gamma2_fit = fit.gamma2;
            report.gamma3_fit = fit.gamma3;
            report.fit_residual = fit.residual;
            report.smallest_gain = gains.back();
            report.gamma1_consistent =
                std::abs(report.gamma1_analytic - report.gamma1_fit) <=
                gamma1_mismatch_bound(report.gamma1_analytic);
            report.classification = classify_from(report.gamma1_analytic, report.gamma2_fit,
                                                  report.gamma1_consistent, tols);
            per_map[static_cast<std::size_t>(mi)].push_back(
                SweepCell{t, x, alpha_v, beta_v, report});
          }
        } catch (const std::exception& e) {
          std::ostringstream oss;
          oss << "sweep cell (t=" << t << ", alpha_v=" << alpha_v << ", beta_v=" << beta_v
              << ") failed: " << e.what();
          const std::scoped_lock lock(failure_mutex);
          if (cell_failure.empty()) cell_failure = oss.str();
        }
      }
    });
    if (!cell_failure.empty()) throw numeric_error(cell_failure);

    for (auto& cells : per_map)
      result.cells.insert(result.cells.end(), cells.begin(), cells.end());
  }

  std::sort(result.cells.begin(), result.cells.end(), [](const SweepCell& a, const SweepCell& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.x != b.x) return a.x < b.x;
    if (a.alpha_v != b.alpha_v) return a.alpha_v < b.alpha_v;
    return a.beta_v < b.beta_v;
  });

  for (const SweepCell& cell : result.cells) {
    if (cell.report.classification == DeviationClass::Profitable)
      result.witnesses.push_back(cell);
    else if (cell.report.classification == DeviationClass::Inconclusive)
      ++result.inconclusive_count;
  }
  if (!result.witnesses.empty())
    result.verdict = SweepVerdict::NotStrong;
  else if (result.inconclusive_count > 0)
    result.verdict = SweepVerdict::Inconclusive;
  else
    result.verdict = SweepVerdict::StrongCandidate;
  return result;
}

McGain mc_cross_check(const CoefficientSet& coeffs, const AffinePolicy& policy,
                      const PsiSpec& spec, double t, double x, const AffineMap& deviation,
                      double eps, std::int64_t paths, double sim_step, std::uint64_t seed,
                      int threads) {
  if (paths < 4) throw config_error("cross-check needs at least four paths");
  if (!(sim_step > 0.0)) throw config_error("simulation step must be positive");
  if (!(eps > 0.0) || t < 0.0 || t + eps > coeffs.horizon)
    throw config_error("spike window must fit inside [0, horizon]");
  if (sim_step > eps)
    throw config_error("simulation step must not exceed the spike window width");

  const SpikePolicy spike(policy, deviation, t, eps);
  const double horizon = coeffs.horizon;

  // Shared step grid: both runs consume the same Gaussian increments, so a
  // deviation equal to the base map cancels exactly.
  std::vector<double> cuts = coeffs.kinks_between(t, horizon);
  {
    std::vector<double> pk = policy_kinks(Policy(spike), t, horizon);
    cuts.insert(cuts.end(), pk.begin(), pk.end());
  }
  cuts.push_back(t);
  cuts.push_back(horizon);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Step {
    double dt, sqrt_dt, a, b, c, d, f;
    double alpha_base, beta_base, alpha_spike, beta_spike;
  };
  std::vector<Step> steps;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double s0 = cuts[seg];
    const double s1 = cuts[seg + 1];
    const int nsteps = std::max<int>(1, static_cast<int>(std::ceil((s1 - s0) / sim_step - 1e-12)));
    const double h = (s1 - s0) / nsteps;
    for (int i = 0; i < nsteps; ++i) {
      const double tk = s0 + i * h;
      const CoefficientValues cv = coeffs.eval(tk);
      const AffineMap mb = policy.map_at(tk);
      const AffineMap ms = spike.map_at(tk);
      steps.push_back({h, std::sqrt(h), cv.a, cv.b, cv.c, cv.d, cv.f, mb.alpha, mb.beta,
                       ms.alpha, ms.beta});
    }
  }

  std::vector<double> terminal_base(static_cast<std::size_t>(paths));
  std::vector<double> terminal_spike(static_cast<std::size_t>(paths));
  parallel_for(paths, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t p = begin; p < end; ++p) {
      CounterRng rng(seed, static_cast<std::uint64_t>(p));
      double xb = x, xs = x;
      for (const Step& s : steps) {
        const double z = s.sqrt_dt * rng.normal();
        const double ub = s.alpha_base * xb + s.beta_base;
        xb += (s.a * xb + s.b * ub + s.c) * s.dt + (s.d * ub + s.f) * z;
        const double us = s.alpha_spike * xs + s.beta_spike;
        xs += (s.a * xs + s.b * us + s.c) * s.dt + (s.d * us + s.f) * z;
      }
      terminal_base[static_cast<std::size_t>(p)] = xb;
      terminal_spike[static_cast<std::size_t>(p)] = xs;
    }
  });

  const int n = spec.max_order();
  const auto j_of = [&](std::span<const double> values) {
    const SampleMoments m = sample_central_moments(values, n);
    std::vector<double> central(static_cast<std::size_t>(n) + 1, 0.0);
    central[0] = 1.0;
    for (int k = 2; k <= n; ++k)
      central[static_cast<std::size_t>(k)] = m.central[static_cast<std::size_t>(k)].value;
    return m.mean.value + psi_eval(spec, t, std::span<const double>(central));
  };

  McGain out;
  out.gain = j_of(terminal_spike) - j_of(terminal_base);

  const std::int64_t batches = std::min<std::int64_t>(32, paths / 2);
  std::vector<double> batch_gain(static_cast<std::size_t>(batches));
  for (std::int64_t bi = 0; bi < batches; ++bi) {
    const std::size_t lo = static_cast<std::size_t>(bi * paths / batches);
    const std::size_t hi = static_cast<std::size_t>((bi + 1) * paths / batches);
    batch_gain[static_cast<std::size_t>(bi)] =
        j_of(std::span<const double>(terminal_spike).subspan(lo, hi - lo)) -
        j_of(std::span<const double>(terminal_base).subspan(lo, hi - lo));
  }
  double mean = 0.0;
  for (double g : batch_gain) mean += g;
  mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double g : batch_gain) var += (g - mean) * (g - mean);
  out.standard_error = std::sqrt(var / (static_cast<double>(batches) *
                                        static_cast<double>(batches - 1)));
  return out;
}

}  // namespace tic
