#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tic/coefficients.hpp"
#include "tic/equilibrium.hpp"
#include "tic/objective.hpp"
#include "tic/policy.hpp"
#include "tic/verifier.hpp"

namespace tic {

struct GridsConfig {
  int time_steps = 200;  // solver intervals; nodes = time_steps + 1
  double x_min = -2.0;
  double x_max = 2.0;
  int x_points = 9;  // solver x grid (Chebyshev spaced)
};

struct SolverConfigBlock {
  double ode_step = 0.0;  // resolved to horizon / 2048
  double corrector_tol = 1e-10;
  int max_corrector_iters = 8;
  double foc_tolerance = 1e-7;
  double affine_residual_threshold = 1e-6;
  double degenerate_denominator = 1e-12;
};

struct DeviationGridConfig {
  std::vector<double> alpha_values = {-1.0, 0.0, 1.0};
  double beta_offset_min = -5.0;
  double beta_offset_max = 5.0;
  int beta_points = 21;
};

struct VerifyConfigBlock {
  int t_points = 4;  // anchors j * horizon / t_points, j = 0..t_points-1
  int x_points = 9;  // uniform anchors on [x_min, x_max]
  DeviationGridConfig deviation;
  std::vector<double> epsilon_ladder;  // resolved to the default ladder
  double tau1 = 1e-8;
  double tau2 = 1e-6;
};

struct SimulationConfigBlock {
  std::int64_t paths = 100000;
  double step = 0.0;  // resolved to horizon / 4096
  std::uint64_t seed = 42;
  int max_cells = 32;  // `simulate` thins the verify grid to at most this
};

struct PolicyConfigBlock {
  bool present = false;
  std::vector<double> grid, alpha, beta;
};

struct ObjectiveConfigBlock {
  std::string kind = "mean-variance";
  double gamma = 1.0;                 // mean-variance
  double gamma2 = 0.0, gamma3 = 0.0, gamma4 = 0.0;  // mvsk
  std::vector<double> c;              // polynomial weights on C_2..C_n
  int max_moment = 2;
};

struct ExperimentConfig {
  CoefficientSet coefficients;  // horizon lives here
  ObjectiveConfigBlock objective;
  GridsConfig grids;
  SolverConfigBlock solver;
  VerifyConfigBlock verify;
  SimulationConfigBlock simulation;
  PolicyConfigBlock policy;

  double horizon() const { return coefficients.horizon; }
  PsiSpec psi() const;
  SolverOptions solver_options() const;
  VerifyTolerances verify_tolerances() const;
  AffinePolicy user_policy() const;  // requires policy.present

  std::vector<double> solver_time_grid() const;
  std::vector<double> solver_x_grid() const;
  std::vector<double> verify_time_anchors() const;
  std::vector<double> verify_x_anchors() const;
};

// Parses and validates a JSON config; unknown keys are rejected and every
// error names the offending field path. All defaults are resolved into the
// returned struct.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Fully resolved echo; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace tic
