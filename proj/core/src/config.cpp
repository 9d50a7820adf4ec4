#include "tic/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tic/errors.hpp"

namespace tic {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw config_error("config error at " + path + ": " + message);
}

void require_keys(const Json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

const Json* find(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double get_finite(const Json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

TimeCurve parse_curve(const Json& j, const std::string& path) {
  if (j.is_number()) return TimeCurve::constant(get_finite(j, path));
  if (j.is_array()) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const Json& pt = j[i];
      const std::string ppath = path + "[" + std::to_string(i) + "]";
      if (!pt.is_array() || pt.size() != 2) fail(ppath, "expected a [time, value] pair");
      pts.emplace_back(get_finite(pt[0], ppath), get_finite(pt[1], ppath));
    }
    try {
      return TimeCurve::piecewise(std::move(pts));
    } catch (const config_error& e) {
      fail(path, e.what());
    }
  }
  fail(path, "expected a number or a breakpoint list");
}

std::vector<double> parse_number_array(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_finite(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void parse_objective(const Json& j, ObjectiveConfigBlock& obj) {
  if (!j.is_object()) fail("objective", "expected an object");
  const Json* kind = find(j, "kind");
  if (!kind || !kind->is_string()) fail("objective.kind", "expected a string");
  obj.kind = kind->get<std::string>();

  if (obj.kind == "mean-variance") {
    require_keys(j, "objective", {"kind", "gamma", "max_moment"});
    const Json* g = find(j, "gamma");
    if (!g) fail("objective.gamma", "required for mean-variance");
    obj.gamma = get_finite(*g, "objective.gamma");
    if (!(obj.gamma > 0.0)) fail("objective.gamma", "must be positive");
    obj.max_moment = 2;
  } else if (obj.kind == "mvsk") {
    require_keys(j, "objective", {"kind", "gamma2", "gamma3", "gamma4", "max_moment"});
    for (const char* key : {"gamma2", "gamma3", "gamma4"}) {
      if (!find(j, key)) fail(std::string("objective.") + key, "required for mvsk");
    }
    obj.gamma2 = get_finite(*find(j, "gamma2"), "objective.gamma2");
    obj.gamma3 = get_finite(*find(j, "gamma3"), "objective.gamma3");
    obj.gamma4 = get_finite(*find(j, "gamma4"), "objective.gamma4");
    obj.max_moment = 4;
  } else if (obj.kind == "polynomial") {
    require_keys(j, "objective", {"kind", "c", "max_moment"});
    const Json* c = find(j, "c");
    if (!c) fail("objective.c", "required for polynomial");
    obj.c = parse_number_array(*c, "objective.c");
    obj.max_moment = static_cast<int>(obj.c.size()) + 1;
  } else {
    fail("objective.kind", "must be one of mean-variance, mvsk, polynomial");
  }

  if (const Json* mm = find(j, "max_moment")) {
    const int requested = get_int(*mm, "objective.max_moment");
    if (requested < obj.max_moment)
      fail("objective.max_moment", "below the objective's own order");
    if (requested > kMaxMomentOrder) fail("objective.max_moment", "capped at 8");
    obj.max_moment = requested;
  }
}

}  // namespace

PsiSpec ExperimentConfig::psi() const {
  PsiSpec spec = [&] {
    if (objective.kind == "mean-variance") return PsiSpec::mean_variance(objective.gamma);
    if (objective.kind == "mvsk")
      return PsiSpec::mvsk(objective.gamma2, objective.gamma3, objective.gamma4);
    return PsiSpec::polynomial(objective.c);
  }();
  return spec.with_max_order(objective.max_moment);
}

SolverOptions ExperimentConfig::solver_options() const {
  SolverOptions opts;
  opts.ode_step = solver.ode_step;
  opts.corrector_tol = solver.corrector_tol;
  opts.max_corrector_iters = solver.max_corrector_iters;
  opts.foc_tolerance = solver.foc_tolerance;
  opts.affine_residual_threshold = solver.affine_residual_threshold;
  opts.degenerate_denominator = solver.degenerate_denominator;
  return opts;
}

VerifyTolerances ExperimentConfig::verify_tolerances() const {
  return {verify.tau1, verify.tau2};
}

AffinePolicy ExperimentConfig::user_policy() const {
  if (!policy.present) throw config_error("no policy block in config");
  return AffinePolicy(policy.grid, policy.alpha, policy.beta);
}

std::vector<double> ExperimentConfig::solver_time_grid() const {
  return uniform_grid(0.0, horizon(), grids.time_steps + 1);
}

std::vector<double> ExperimentConfig::solver_x_grid() const {
  return chebyshev_grid(grids.x_min, grids.x_max, grids.x_points);
}

std::vector<double> ExperimentConfig::verify_time_anchors() const {
  std::vector<double> out(static_cast<std::size_t>(verify.t_points));
  for (int j = 0; j < verify.t_points; ++j)
    out[static_cast<std::size_t>(j)] = horizon() * static_cast<double>(j) / verify.t_points;
  return out;
}

std::vector<double> ExperimentConfig::verify_x_anchors() const {
  if (verify.x_points == 1) return {0.5 * (grids.x_min + grids.x_max)};
  return uniform_grid(grids.x_min, grids.x_max, verify.x_points);
}

ExperimentConfig parse_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config must be a JSON object");
  require_keys(root, "", {"horizon", "coefficients", "objective", "grids", "solver",
                          "verify", "simulation", "policy"});

  ExperimentConfig cfg;

  const Json* horizon = find(root, "horizon");
  if (!horizon) fail("horizon", "required");
  cfg.coefficients.horizon = get_finite(*horizon, "horizon");
  if (!(cfg.coefficients.horizon > 0.0)) fail("horizon", "must be positive");

  if (const Json* coeffs = find(root, "coefficients")) {
    if (!coeffs->is_object()) fail("coefficients", "expected an object");
    require_keys(*coeffs, "coefficients", {"A", "B", "C", "D", "F"});
    if (const Json* c = find(*coeffs, "A")) cfg.coefficients.A = parse_curve(*c, "coefficients.A");
    if (const Json* c = find(*coeffs, "B")) cfg.coefficients.B = parse_curve(*c, "coefficients.B");
    if (const Json* c = find(*coeffs, "C")) cfg.coefficients.C = parse_curve(*c, "coefficients.C");
    if (const Json* c = find(*coeffs, "D")) cfg.coefficients.D = parse_curve(*c, "coefficients.D");
    if (const Json* c = find(*coeffs, "F")) cfg.coefficients.F = parse_curve(*c, "coefficients.F");
  }
  try {
    cfg.coefficients.validate();
  } catch (const config_error& e) {
    fail("coefficients", e.what());
  }

  const Json* objective = find(root, "objective");
  if (!objective) fail("objective", "required");
  parse_objective(*objective, cfg.objective);

  if (const Json* grids = find(root, "grids")) {
    if (!grids->is_object()) fail("grids", "expected an object");
    require_keys(*grids, "grids", {"time_steps", "x_min", "x_max", "x_points"});
    if (const Json* v = find(*grids, "time_steps")) {
      cfg.grids.time_steps = get_int(*v, "grids.time_steps");
      if (cfg.grids.time_steps < 1) fail("grids.time_steps", "must be at least 1");
    }
    if (const Json* v = find(*grids, "x_min")) cfg.grids.x_min = get_finite(*v, "grids.x_min");
    if (const Json* v = find(*grids, "x_max")) cfg.grids.x_max = get_finite(*v, "grids.x_max");
    if (const Json* v = find(*grids, "x_points")) {
      cfg.grids.x_points = get_int(*v, "grids.x_points");
      if (cfg.grids.x_points < 2) fail("grids.x_points", "must be at least 2");
    }
    if (!(cfg.grids.x_min < cfg.grids.x_max)) fail("grids.x_min", "must be below x_max");
  }

  if (const Json* solver = find(root, "solver")) {
    if (!solver->is_object()) fail("solver", "expected an object");
    require_keys(*solver, "solver",
                 {"ode_step", "corrector_tol", "max_corrector_iters", "foc_tolerance",
                  "affine_residual_threshold", "degenerate_denominator"});
    if (const Json* v = find(*solver, "ode_step")) {
      cfg.solver.ode_step = get_finite(*v, "solver.ode_step");
      if (!(cfg.solver.ode_step > 0.0)) fail("solver.ode_step", "must be positive");
    }
    if (const Json* v = find(*solver, "corrector_tol")) {
      cfg.solver.corrector_tol = get_finite(*v, "solver.corrector_tol");
      if (!(cfg.solver.corrector_tol > 0.0)) fail("solver.corrector_tol", "must be positive");
    }
    if (const Json* v = find(*solver, "max_corrector_iters")) {
      cfg.solver.max_corrector_iters = get_int(*v, "solver.max_corrector_iters");
      if (cfg.solver.max_corrector_iters < 2)
        fail("solver.max_corrector_iters", "must be at least 2");
    }
    if (const Json* v = find(*solver, "foc_tolerance"))
      cfg.solver.foc_tolerance = get_finite(*v, "solver.foc_tolerance");
    if (const Json* v = find(*solver, "affine_residual_threshold"))
      cfg.solver.affine_residual_threshold =
          get_finite(*v, "solver.affine_residual_threshold");
    if (const Json* v = find(*solver, "degenerate_denominator"))
      cfg.solver.degenerate_denominator = get_finite(*v, "solver.degenerate_denominator");
  }
  if (cfg.solver.ode_step == 0.0) cfg.solver.ode_step = default_ode_step(cfg.horizon());

  if (const Json* verify = find(root, "verify")) {
    if (!verify->is_object()) fail("verify", "expected an object");
    require_keys(*verify, "verify",
                 {"t_points", "x_points", "deviation", "epsilon_ladder", "tau1", "tau2"});
    if (const Json* v = find(*verify, "t_points")) {
      cfg.verify.t_points = get_int(*v, "verify.t_points");
      if (cfg.verify.t_points < 1) fail("verify.t_points", "must be at least 1");
    }
    if (const Json* v = find(*verify, "x_points")) {
      cfg.verify.x_points = get_int(*v, "verify.x_points");
      if (cfg.verify.x_points < 1) fail("verify.x_points", "must be at least 1");
    }
    if (const Json* dev = find(*verify, "deviation")) {
      if (!dev->is_object()) fail("verify.deviation", "expected an object");
      require_keys(*dev, "verify.deviation",
                   {"alpha_values", "beta_offset_min", "beta_offset_max", "beta_points"});
      if (const Json* v = find(*dev, "alpha_values"))
        cfg.verify.deviation.alpha_values =
            parse_number_array(*v, "verify.deviation.alpha_values");
      if (const Json* v = find(*dev, "beta_offset_min"))
        cfg.verify.deviation.beta_offset_min =
            get_finite(*v, "verify.deviation.beta_offset_min");
      if (const Json* v = find(*dev, "beta_offset_max"))
        cfg.verify.deviation.beta_offset_max =
            get_finite(*v, "verify.deviation.beta_offset_max");
      if (const Json* v = find(*dev, "beta_points")) {
        cfg.verify.deviation.beta_points = get_int(*v, "verify.deviation.beta_points");
        if (cfg.verify.deviation.beta_points < 1)
          fail("verify.deviation.beta_points", "must be at least 1");
      }
      if (!(cfg.verify.deviation.beta_offset_min <= cfg.verify.deviation.beta_offset_max))
        fail("verify.deviation.beta_offset_min", "must not exceed beta_offset_max");
    }
    if (const Json* v = find(*verify, "epsilon_ladder"))
      cfg.verify.epsilon_ladder = parse_number_array(*v, "verify.epsilon_ladder");
    if (const Json* v = find(*verify, "tau1")) {
      cfg.verify.tau1 = get_finite(*v, "verify.tau1");
      if (!(cfg.verify.tau1 > 0.0)) fail("verify.tau1", "must be positive");
    }
    if (const Json* v = find(*verify, "tau2")) {
      cfg.verify.tau2 = get_finite(*v, "verify.tau2");
      if (!(cfg.verify.tau2 > 0.0)) fail("verify.tau2", "must be positive");
    }
  }
  if (cfg.verify.epsilon_ladder.empty())
    cfg.verify.epsilon_ladder = default_epsilon_ladder(cfg.horizon());
  for (std::size_t i = 0; i < cfg.verify.epsilon_ladder.size(); ++i) {
    const double e = cfg.verify.epsilon_ladder[i];
    if (!(e > 0.0)) fail("verify.epsilon_ladder", "widths must be positive");
    if (i > 0 && !(e < cfg.verify.epsilon_ladder[i - 1]))
      fail("verify.epsilon_ladder", "widths must be strictly decreasing");
  }
  if (cfg.verify.epsilon_ladder.size() < 3)
    fail("verify.epsilon_ladder", "needs at least three levels");
  if (cfg.verify.epsilon_ladder.front() > cfg.horizon())
    fail("verify.epsilon_ladder", "largest width exceeds the horizon");

  if (const Json* sim = find(root, "simulation")) {
    if (!sim->is_object()) fail("simulation", "expected an object");
    require_keys(*sim, "simulation", {"paths", "step", "seed", "max_cells"});
    if (const Json* v = find(*sim, "paths")) {
      if (!v->is_number_integer()) fail("simulation.paths", "expected an integer");
      cfg.simulation.paths = v->get<std::int64_t>();
      if (cfg.simulation.paths < 1) fail("simulation.paths", "must be at least 1");
    }
    if (const Json* v = find(*sim, "step")) {
      cfg.simulation.step = get_finite(*v, "simulation.step");
      if (!(cfg.simulation.step > 0.0)) fail("simulation.step", "must be positive");
    }
    if (const Json* v = find(*sim, "seed")) {
      if (!v->is_number_unsigned() && !v->is_number_integer())
        fail("simulation.seed", "expected an integer");
      cfg.simulation.seed = v->get<std::uint64_t>();
    }
    if (const Json* v = find(*sim, "max_cells")) {
      cfg.simulation.max_cells = get_int(*v, "simulation.max_cells");
      if (cfg.simulation.max_cells < 1) fail("simulation.max_cells", "must be at least 1");
    }
  }
  if (cfg.simulation.step == 0.0) cfg.simulation.step = default_sim_step(cfg.horizon());

  if (const Json* pol = find(root, "policy")) {
    if (!pol->is_object()) fail("policy", "expected an object");
    require_keys(*pol, "policy", {"grid", "alpha", "beta"});
    for (const char* key : {"grid", "alpha", "beta"}) {
      if (!find(*pol, key)) fail(std::string("policy.") + key, "required");
    }
    cfg.policy.present = true;
    cfg.policy.grid = parse_number_array(*find(*pol, "grid"), "policy.grid");
    cfg.policy.alpha = parse_number_array(*find(*pol, "alpha"), "policy.alpha");
    cfg.policy.beta = parse_number_array(*find(*pol, "beta"), "policy.beta");
    try {
      const AffinePolicy parsed(cfg.policy.grid, cfg.policy.alpha, cfg.policy.beta);
      if (parsed.horizon() != cfg.horizon())
        fail("policy.grid", "must end at the horizon");
    } catch (const config_error& e) {
      fail("policy", e.what());
    }
  }

  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return parse_config(oss.str());
}

namespace {

Json curve_to_json(const TimeCurve& curve) {
  if (curve.is_constant()) return curve.constant_value();
  Json arr = Json::array();
  const auto& times = curve.breakpoint_times();
  for (double t : times) arr.push_back(Json::array({t, curve(t)}));
  return arr;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  Json root;
  root["horizon"] = cfg.horizon();
  root["coefficients"] = {{"A", curve_to_json(cfg.coefficients.A)},
                          {"B", curve_to_json(cfg.coefficients.B)},
                          {"C", curve_to_json(cfg.coefficients.C)},
                          {"D", curve_to_json(cfg.coefficients.D)},
                          {"F", curve_to_json(cfg.coefficients.F)}};
  Json obj;
  obj["kind"] = cfg.objective.kind;
  if (cfg.objective.kind == "mean-variance") {
    obj["gamma"] = cfg.objective.gamma;
  } else if (cfg.objective.kind == "mvsk") {
    obj["gamma2"] = cfg.objective.gamma2;
    obj["gamma3"] = cfg.objective.gamma3;
    obj["gamma4"] = cfg.objective.gamma4;
  } else {
    obj["c"] = cfg.objective.c;
  }
  obj["max_moment"] = cfg.objective.max_moment;
  root["objective"] = obj;
  root["grids"] = {{"time_steps", cfg.grids.time_steps},
                   {"x_min", cfg.grids.x_min},
                   {"x_max", cfg.grids.x_max},
                   {"x_points", cfg.grids.x_points}};
  root["solver"] = {{"ode_step", cfg.solver.ode_step},
                    {"corrector_tol", cfg.solver.corrector_tol},
                    {"max_corrector_iters", cfg.solver.max_corrector_iters},
                    {"foc_tolerance", cfg.solver.foc_tolerance},
                    {"affine_residual_threshold", cfg.solver.affine_residual_threshold},
                    {"degenerate_denominator", cfg.solver.degenerate_denominator}};
  root["verify"] = {{"t_points", cfg.verify.t_points},
                    {"x_points", cfg.verify.x_points},
                    {"deviation",
                     {{"alpha_values", cfg.verify.deviation.alpha_values},
                      {"beta_offset_min", cfg.verify.deviation.beta_offset_min},
                      {"beta_offset_max", cfg.verify.deviation.beta_offset_max},
                      {"beta_points", cfg.verify.deviation.beta_points}}},
                    {"epsilon_ladder", cfg.verify.epsilon_ladder},
                    {"tau1", cfg.verify.tau1},
                    {"tau2", cfg.verify.tau2}};
  root["simulation"] = {{"paths", cfg.simulation.paths},
                        {"step", cfg.simulation.step},
                        {"seed", cfg.simulation.seed},
                        {"max_cells", cfg.simulation.max_cells}};
  if (cfg.policy.present) {
    root["policy"] = {{"grid", cfg.policy.grid},
                      {"alpha", cfg.policy.alpha},
                      {"beta", cfg.policy.beta}};
  }
  return root.dump(2);
}

}  // namespace tic
