#include "tic/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "tic/errors.hpp"
#include "tic/parallel.hpp"
#include "tic/rng.hpp"

namespace tic {

namespace {

struct StepTable {
  std::vector<double> dt, sqrt_dt;
  std::vector<double> a, b, c, d, f;       // coefficients at step left endpoints
  std::vector<double> alpha, beta;         // policy map at step left endpoints
};

StepTable build_steps(const CoefficientSet& coeffs, const Policy& policy, double t0,
                      double step) {
  const double horizon = coeffs.horizon;
  std::vector<double> cuts = coeffs.kinks_between(t0, horizon);
  {
    std::vector<double> pk = policy_kinks(policy, t0, horizon);
    cuts.insert(cuts.end(), pk.begin(), pk.end());
  }
  cuts.push_back(t0);
  cuts.push_back(horizon);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  StepTable table;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double s0 = cuts[seg];
    const double s1 = cuts[seg + 1];
    const int nsteps = std::max<int>(1, static_cast<int>(std::ceil((s1 - s0) / step - 1e-12)));
    const double h = (s1 - s0) / nsteps;
    for (int i = 0; i < nsteps; ++i) {
      const double tk = s0 + i * h;
      const CoefficientValues cv = coeffs.eval(tk);
      const AffineMap map = policy_map_at(policy, tk);
      table.dt.push_back(h);
      table.sqrt_dt.push_back(std::sqrt(h));
      table.a.push_back(cv.a);
      table.b.push_back(cv.b);
      table.c.push_back(cv.c);
      table.d.push_back(cv.d);
      table.f.push_back(cv.f);
      table.alpha.push_back(map.alpha);
      table.beta.push_back(map.beta);
    }
  }
  return table;
}

}  // namespace

PathSample simulate_terminal(const CoefficientSet& coeffs, const Policy& policy,
                             double t, double x, std::int64_t paths, double step,
                             std::uint64_t seed, int threads) {
  if (paths < 1) throw config_error("simulation needs at least one path");
  if (!(step > 0.0)) throw config_error("simulation step must be positive");
  if (t < 0.0 || t > coeffs.horizon)
    throw domain_error("simulation start time outside [0, horizon]");
  if (const auto* spike = std::get_if<SpikePolicy>(&policy)) {
    if (spike->width > 0.0 && step > spike->width)
      throw config_error("simulation step must not exceed the spike window width");
  }

  PathSample sample;
  sample.seed = seed;
  sample.paths = paths;
  sample.step = step;
  sample.t0 = t;
  sample.x0 = x;
  sample.terminal.assign(static_cast<std::size_t>(paths), x);
  if (t == coeffs.horizon) return sample;

  const StepTable table = build_steps(coeffs, policy, t, step);
  const std::size_t nsteps = table.dt.size();

  parallel_for(paths, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t p = begin; p < end; ++p) {
      CounterRng rng(seed, static_cast<std::uint64_t>(p));
      double xt = x;
      for (std::size_t k = 0; k < nsteps; ++k) {
        const double u = table.alpha[k] * xt + table.beta[k];
        const double drift = table.a[k] * xt + table.b[k] * u + table.c[k];
        const double sigma = table.d[k] * u + table.f[k];
        xt += drift * table.dt[k] + sigma * table.sqrt_dt[k] * rng.normal();
      }
      sample.terminal[static_cast<std::size_t>(p)] = xt;
    }
  });
  return sample;
}

SampleMoments sample_central_moments(std::span<const double> values, int n) {
  if (n < 2) throw config_error("sample moments need order >= 2");
  if (n > 8) throw config_error("moment order capped at 8");
  if (values.size() < 2) throw config_error("sample moments need at least two values");

  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;

  // Central power sums up to 2n (delta-method variances reach order 2k).
  std::vector<double> mu(2 * n + 2, 0.0);
  for (double v : values) {
    const double d = v - mean;
    double pw = d;
    for (int k = 2; k <= 2 * n + 1; ++k) {
      pw *= d;
      mu[k] += pw;
    }
  }
  for (int k = 2; k <= 2 * n + 1; ++k) mu[k] /= count;
  mu[0] = 1.0;
  mu[1] = 0.0;

  SampleMoments out;
  out.mean.value = mean;
  out.mean.se = std::sqrt(std::max(0.0, mu[2] / count));
  out.central.assign(n + 1, MomentEstimate{});
  out.central[0].value = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    // Var(M_k) ~ (mu_{2k} - mu_k^2 + k^2 mu_2 mu_{k-1}^2 - 2k mu_{k-1} mu_{k+1}) / N
    const double var = (mu[2 * k] - mu[k] * mu[k] + kk * kk * mu[2] * mu[k - 1] * mu[k - 1] -
                        2.0 * kk * mu[k - 1] * mu[k + 1]) /
                       count;
    out.central[k].value = mu[k];
    out.central[k].se = std::sqrt(std::max(0.0, var));
  }
  return out;
}

SampleMoments sample_central_moments(const PathSample& sample, int n) {
  return sample_central_moments(std::span<const double>(sample.terminal), n);
}

}  // namespace tic
