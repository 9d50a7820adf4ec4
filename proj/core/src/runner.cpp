#include "tic/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tic/errors.hpp"
#include "tic/version.hpp"

namespace tic {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Collects files as (name, content), writes them to temporaries and renames
// all of them only once the whole run has succeeded.
class StagedWriter {
 public:
  explicit StagedWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  ~StagedWriter() {
    for (const auto& tmp : staged_) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
    }
  }

  void stage(const std::string& name, const std::string& content) {
    const std::filesystem::path tmp = dir_ / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write to output directory: " + dir_.string());
    out << content;
    out.close();
    if (!out) throw config_error("failed writing " + tmp.string());
    staged_.push_back(tmp);
    names_.push_back(name);
  }

  std::vector<std::string> commit() {
    for (std::size_t i = 0; i < staged_.size(); ++i)
      std::filesystem::rename(staged_[i], dir_ / names_[i]);
    staged_.clear();
    return std::move(names_);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> staged_;
  std::vector<std::string> names_;
};

AffinePolicy resolve_policy(const ExperimentConfig& cfg, bool force_solve) {
  if (!force_solve && cfg.policy.present) return cfg.user_policy();
  const EquilibriumSolution sol =
      solve_equilibrium_backward(cfg.coefficients, cfg.psi(), cfg.solver_time_grid(),
                                 cfg.solver_x_grid(), cfg.solver_options());
  return sol.policy;
}

SweepGrid sweep_grid_from(const ExperimentConfig& cfg) {
  SweepGrid grid;
  grid.times = cfg.verify_time_anchors();
  grid.xs = cfg.verify_x_anchors();
  grid.deviation_alphas = cfg.verify.deviation.alpha_values;
  const auto& dev = cfg.verify.deviation;
  if (dev.beta_points == 1) {
    grid.deviation_beta_offsets = {0.5 * (dev.beta_offset_min + dev.beta_offset_max)};
  } else {
    grid.deviation_beta_offsets =
        uniform_grid(dev.beta_offset_min, dev.beta_offset_max, dev.beta_points);
  }
  grid.ladder = cfg.verify.epsilon_ladder;
  return grid;
}

std::string equilibrium_csv(const EquilibriumSolution& sol) {
  std::ostringstream csv;
  csv << "t,alpha,beta,foc_residual,affine_residual,concavity_margin\n";
  const auto& grid = sol.policy.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const NodeDiagnostics& d = sol.diagnostics[i];
    csv << fmt17(grid[i]) << ',' << fmt17(sol.policy.alpha()[i]) << ','
        << fmt17(sol.policy.beta()[i]) << ',' << fmt17(d.foc_residual) << ','
        << fmt17(d.affine_residual) << ',' << fmt17(d.concavity_margin) << '\n';
  }
  return csv.str();
}

std::string verification_csv(const SweepResult& sweep) {
  std::ostringstream csv;
  csv << "t,x,alpha_v,beta_v,gamma1_analytic,gamma1_fit,gamma2_fit,fit_residual,class\n";
  for (const SweepCell& cell : sweep.cells) {
    csv << fmt17(cell.t) << ',' << fmt17(cell.x) << ',' << fmt17(cell.alpha_v) << ','
        << fmt17(cell.beta_v) << ',' << fmt17(cell.report.gamma1_analytic) << ','
        << fmt17(cell.report.gamma1_fit) << ',' << fmt17(cell.report.gamma2_fit) << ','
        << fmt17(cell.report.fit_residual) << ',' << to_string(cell.report.classification)
        << '\n';
  }
  return csv.str();
}

Json summary_json(Subcommand cmd, const ExperimentConfig& cfg,
                  const std::vector<std::string>& files, const SweepResult* sweep) {
  Json summary;
  summary["subcommand"] = std::string(to_string(cmd));
  summary["tool_version"] = kVersion;
  if (sweep) {
    summary["verdict"] = std::string(to_string(sweep->verdict));
    summary["witness_count"] = sweep->witnesses.size();
    Json witnesses = Json::array();
    for (const SweepCell& w : sweep->witnesses) {
      witnesses.push_back({{"t", w.t},
                           {"x", w.x},
                           {"alpha_v", w.alpha_v},
                           {"beta_v", w.beta_v},
                           {"gamma1_analytic", w.report.gamma1_analytic},
                           {"gamma2_fit", w.report.gamma2_fit}});
    }
    summary["witnesses"] = witnesses;
    summary["inconclusive_count"] = sweep->inconclusive_count;
  }
  summary["files"] = files;
  summary["config"] = Json::parse(config_to_json(cfg));
  return summary;
}

}  // namespace

Subcommand subcommand_from_name(const std::string& name) {
  if (name == "moments") return Subcommand::Moments;
  if (name == "solve") return Subcommand::Solve;
  if (name == "verify") return Subcommand::Verify;
  if (name == "sweep") return Subcommand::Sweep;
  if (name == "simulate") return Subcommand::Simulate;
  throw config_error("unknown subcommand: " + name);
}

std::string_view to_string(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::Moments: return "moments";
    case Subcommand::Solve: return "solve";
    case Subcommand::Verify: return "verify";
    case Subcommand::Sweep: return "sweep";
    case Subcommand::Simulate: return "simulate";
  }
  return "unknown";
}

RunResult run(Subcommand cmd, const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig cfg = config;
  if (options.seed) cfg.simulation.seed = *options.seed;
  const int threads = std::max(1, options.threads);
  const double ode_step = cfg.solver.ode_step;
  const PsiSpec spec = cfg.psi();

  StagedWriter writer(options.out_dir);
  std::vector<std::string> names;
  RunResult result;

  switch (cmd) {
    case Subcommand::Moments: {
      const AffinePolicy policy = resolve_policy(cfg, /*force_solve=*/false);
      std::ostringstream csv;
      csv << "t,x,y1";
      for (int k = 2; k <= spec.max_order(); ++k) csv << ",c" << k;
      csv << '\n';
      for (double t : cfg.verify_time_anchors()) {
        for (double x : cfg.verify_x_anchors()) {
          const CentralMoments m = conditional_central_moments(
              cfg.coefficients, Policy(policy), t, x, spec.max_order(), ode_step);
          csv << fmt17(t) << ',' << fmt17(x) << ',' << fmt17(m.mean);
          for (int k = 2; k <= spec.max_order(); ++k)
            csv << ',' << fmt17(m.central[static_cast<std::size_t>(k)]);
          csv << '\n';
        }
      }
      writer.stage("moments.csv", csv.str());
      names = {"moments.csv"};
      break;
    }
    case Subcommand::Solve: {
      const EquilibriumSolution sol =
          solve_equilibrium_backward(cfg.coefficients, spec, cfg.solver_time_grid(),
                                     cfg.solver_x_grid(), cfg.solver_options());
      writer.stage("equilibrium.csv", equilibrium_csv(sol));
      names = {"equilibrium.csv"};
      break;
    }
    case Subcommand::Verify:
    case Subcommand::Sweep: {
      const bool force_solve = cmd == Subcommand::Sweep;
      std::optional<EquilibriumSolution> sol;
      AffinePolicy policy = [&] {
        if (!force_solve && cfg.policy.present) return cfg.user_policy();
        sol = solve_equilibrium_backward(cfg.coefficients, spec, cfg.solver_time_grid(),
                                         cfg.solver_x_grid(), cfg.solver_options());
        return sol->policy;
      }();
      const SweepResult sweep =
          strong_equilibrium_sweep(cfg.coefficients, policy, spec, sweep_grid_from(cfg),
                                   ode_step, cfg.verify_tolerances(), threads);
      if (cmd == Subcommand::Sweep && sol) {
        writer.stage("equilibrium.csv", equilibrium_csv(*sol));
        names.push_back("equilibrium.csv");
      }
      writer.stage("verification.csv", verification_csv(sweep));
      names.push_back("verification.csv");
      result.verdict = std::string(to_string(sweep.verdict));
      result.witness_count = sweep.witnesses.size();
      writer.stage("summary.json", summary_json(cmd, cfg, names, &sweep).dump(2) + "\n");
      names.push_back("summary.json");
      result.files = writer.commit();
      return result;
    }
    case Subcommand::Simulate: {
      const AffinePolicy policy = resolve_policy(cfg, /*force_solve=*/false);
      const SweepGrid grid = sweep_grid_from(cfg);
      const double eps = grid.ladder.front();

      struct Cell {
        double t, x, alpha_v, beta_v;
      };
      std::vector<Cell> cells;
      for (double t : grid.times) {
        const AffineMap base_map = policy.map_at(t);
        for (double x : grid.xs) {
          for (double av : grid.deviation_alphas) {
            for (double off : grid.deviation_beta_offsets) {
              const double bv = base_map.beta + off;
              if (std::abs(av - base_map.alpha) <= 1e-12 &&
                  std::abs(bv - base_map.beta) <=
                      1e-12 * std::max(1.0, std::abs(base_map.beta)))
                continue;
              cells.push_back({t, x, av, bv});
            }
          }
        }
      }
      // Thin to at most max_cells with a deterministic stride.
      std::vector<Cell> picked;
      const std::size_t max_cells = static_cast<std::size_t>(cfg.simulation.max_cells);
      if (cells.size() <= max_cells) {
        picked = cells;
      } else {
        picked.reserve(max_cells);
        for (std::size_t i = 0; i < max_cells; ++i)
          picked.push_back(cells[i * cells.size() / max_cells]);
      }

      std::ostringstream csv;
      csv << "t,x,alpha_v,beta_v,epsilon,gain_exact,gain_mc,mc_se,z\n";
      for (const Cell& cell : picked) {
        const AffineMap dev{cell.alpha_v, cell.beta_v};
        const double exact = exact_spike_gain(cfg.coefficients, policy, spec, dev, cell.t,
                                              cell.x, eps, ode_step);
        const McGain mc =
            mc_cross_check(cfg.coefficients, policy, spec, cell.t, cell.x, dev, eps,
                           cfg.simulation.paths, cfg.simulation.step, cfg.simulation.seed,
                           threads);
        const double z =
            mc.standard_error > 0.0 ? (mc.gain - exact) / mc.standard_error : 0.0;
        csv << fmt17(cell.t) << ',' << fmt17(cell.x) << ',' << fmt17(cell.alpha_v) << ','
            << fmt17(cell.beta_v) << ',' << fmt17(eps) << ',' << fmt17(exact) << ','
            << fmt17(mc.gain) << ',' << fmt17(mc.standard_error) << ',' << fmt17(z) << '\n';
      }
      writer.stage("simulate.csv", csv.str());
      names = {"simulate.csv"};
      break;
    }
  }

  writer.stage("summary.json", summary_json(cmd, cfg, names, nullptr).dump(2) + "\n");
  names.push_back("summary.json");
  result.files = writer.commit();
  return result;
}

}  // namespace tic
