// JSON configuration ingestion. Every field has a documented default (the
// default desk-scale instance); unknown keys are rejected.

#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "obstacle/errors.hpp"
#include "obstacle/model.hpp"
#include "obstacle/mountain_pass.hpp"
#include "obstacle/vi_solver.hpp"

namespace obstacle {

/// One sweep run: the instance template, the lambda ladder, solver and
/// mountain-pass options, mesh resolution and output location.
struct SweepConfig {
  ProblemInstance instance;
  std::size_t mesh_n = 2001;
  std::vector<double> lambdas = {1.0, 3.16, 10.0, 31.6, 100.0, 316.0, 1000.0};
  SolverOptions solver;
  MountainPassOptions mountain_pass;
  std::string out_dir;
  int workers = 1;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline double num(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::vector<double> num_list(const nlohmann::json& j, const std::string& key) {
  if (!j.at(key).is_array()) throw ConfigError("field '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError("array '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline SweepConfig parse_config(const nlohmann::json& j) {
  using nlohmann::json;
  detail::check_keys(j, {"nonlinearity", "potential", "obstacle", "penalization",
                         "lambda", "L", "r", "mesh", "relax_smallness", "sweep",
                         "solver", "mountain_pass"},
                     "config root");
  SweepConfig cfg;
  ProblemInstance& inst = cfg.instance;

  if (j.contains("nonlinearity")) {
    const json& p = j.at("nonlinearity");
    detail::check_keys(p, {"kind", "p", "theta", "t", "f"}, "nonlinearity");
    const std::string kind = p.value("kind", std::string("power"));
    if (kind == "power") {
      const double pw = detail::num(p, "p", 3.0);
      inst.nonlinearity = NonlinearitySpec::power(pw);
      if (p.contains("theta") &&
          std::abs(detail::num(p, "theta", pw + 1.0) - (pw + 1.0)) > 1e-12)
        throw ConfigError("power nonlinearity has theta = p + 1");
    } else if (kind == "tabulated") {
      if (!p.contains("t") || !p.contains("f") || !p.contains("theta"))
        throw ConfigError("tabulated nonlinearity needs t, f and theta");
      inst.nonlinearity = NonlinearitySpec::tabulated(
          detail::num_list(p, "t"), detail::num_list(p, "f"), p.at("theta").get<double>());
    } else {
      throw ConfigError("nonlinearity kind must be 'power' or 'tabulated'");
    }
  }

  if (j.contains("potential")) {
    const json& p = j.at("potential");
    detail::check_keys(p, {"kind", "o_left", "o_right", "cap", "slope", "x", "v"},
                       "potential");
    const std::string kind = p.value("kind", std::string("well"));
    const double ol = detail::num(p, "o_left", -1.0);
    const double orr = detail::num(p, "o_right", 1.0);
    if (kind == "well") {
      inst.potential = PotentialSpec::well(ol, orr, detail::num(p, "cap", 1.0),
                                           detail::num(p, "slope", 1.0));
    } else if (kind == "tabulated") {
      if (!p.contains("x") || !p.contains("v"))
        throw ConfigError("tabulated potential needs x and v");
      inst.potential = PotentialSpec::tabulated(detail::num_list(p, "x"),
                                                detail::num_list(p, "v"), ol, orr);
    } else {
      throw ConfigError("potential kind must be 'well' or 'tabulated'");
    }
  }

  if (j.contains("obstacle")) {
    const json& p = j.at("obstacle");
    detail::check_keys(p, {"kind", "center", "halfwidth", "amplitude", "tail", "x", "phi"},
                       "obstacle");
    const std::string kind = p.value("kind", std::string("bump"));
    if (kind == "bump") {
      inst.obstacle = ObstacleSpec::bump(
          detail::num(p, "center", 0.0), detail::num(p, "halfwidth", 0.5),
          detail::num(p, "amplitude", 0.18), detail::num(p, "tail", 0.0));
    } else if (kind == "tabulated") {
      if (!p.contains("x") || !p.contains("phi"))
        throw ConfigError("tabulated obstacle needs x and phi");
      inst.obstacle =
          ObstacleSpec::tabulated(detail::num_list(p, "x"), detail::num_list(p, "phi"));
    } else {
      throw ConfigError("obstacle kind must be 'bump' or 'tabulated'");
    }
  }

  {
    nlohmann::json p = j.value("penalization", nlohmann::json::object());
    detail::check_keys(p, {"k", "omega_left", "omega_right"}, "penalization");
    inst.penalization = make_penalization(
        inst.nonlinearity, detail::num(p, "k", 4.0), detail::num(p, "omega_left", -1.5),
        detail::num(p, "omega_right", 1.5));
  }

  inst.lambda = detail::num(j, "lambda", 1.0);
  if (inst.lambda < 0.0) throw ConfigError("lambda must be >= 0");
  inst.domain_halfwidth = detail::num(j, "L", 8.0);
  if (!(inst.domain_halfwidth > 0.0)) throw ConfigError("L must be positive");
  inst.ball_radius = detail::num(j, "r", 1.0);
  if (!(inst.ball_radius > 0.0)) throw ConfigError("r must be positive");
  inst.relax_smallness = j.value("relax_smallness", false);

  if (j.contains("mesh")) {
    detail::check_keys(j.at("mesh"), {"n"}, "mesh");
    const double n = detail::num(j.at("mesh"), "n", 2001.0);
    if (n < 3.0 || n != std::floor(n)) throw ConfigError("mesh.n must be an integer >= 3");
    cfg.mesh_n = static_cast<std::size_t>(n);
  }

  if (j.contains("sweep")) {
    detail::check_keys(j.at("sweep"), {"lambdas"}, "sweep");
    if (j.at("sweep").contains("lambdas"))
      cfg.lambdas = detail::num_list(j.at("sweep"), "lambdas");
  }
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    if (!(cfg.lambdas[i] > 0.0)) throw ConfigError("sweep lambdas must be positive");
    if (i > 0 && !(cfg.lambdas[i] > cfg.lambdas[i - 1]))
      throw ConfigError("sweep lambdas must be strictly increasing");
  }

  if (j.contains("solver")) {
    const json& p = j.at("solver");
    detail::check_keys(p, {"method", "tol", "max_iter", "armijo_c1", "backtrack", "step0"},
                       "solver");
    const std::string method = p.value("method", std::string("projected_gradient"));
    if (method == "projected_gradient")
      cfg.solver.method = SolveMethod::projected_gradient;
    else if (method == "semismooth_newton")
      cfg.solver.method = SolveMethod::semismooth_newton;
    else
      throw ConfigError("solver.method must be projected_gradient or semismooth_newton");
    cfg.solver.tol = detail::num(p, "tol", cfg.solver.tol);
    cfg.solver.max_iter = static_cast<int>(detail::num(p, "max_iter", cfg.solver.max_iter));
    cfg.solver.armijo_c1 = detail::num(p, "armijo_c1", cfg.solver.armijo_c1);
    cfg.solver.backtrack = detail::num(p, "backtrack", cfg.solver.backtrack);
    cfg.solver.step0 = detail::num(p, "step0", cfg.solver.step0);
    if (!(cfg.solver.tol > 0.0) || cfg.solver.max_iter < 1)
      throw ConfigError("solver requires tol > 0 and max_iter >= 1");
  }

  if (j.contains("mountain_pass")) {
    const json& p = j.at("mountain_pass");
    detail::check_keys(p, {"path_points", "tol", "path_tol", "max_sweeps", "respread_every",
                           "polish_every", "sigma_grid", "record_trace"},
                       "mountain_pass");
    MountainPassOptions& mp = cfg.mountain_pass;
    mp.path_points = static_cast<int>(detail::num(p, "path_points", mp.path_points));
    mp.tol = detail::num(p, "tol", mp.tol);
    mp.path_tol = detail::num(p, "path_tol", mp.path_tol);
    mp.max_sweeps = static_cast<int>(detail::num(p, "max_sweeps", mp.max_sweeps));
    mp.respread_every = static_cast<int>(detail::num(p, "respread_every", mp.respread_every));
    mp.polish_every = static_cast<int>(detail::num(p, "polish_every", mp.polish_every));
    mp.sigma_grid = static_cast<int>(detail::num(p, "sigma_grid", mp.sigma_grid));
    mp.record_trace = p.value("record_trace", false);
    if (mp.path_points < 2 || !(mp.tol > 0.0) || mp.max_sweeps < 1)
      throw ConfigError("mountain_pass requires path_points >= 2, tol > 0, max_sweeps >= 1");
  }

  return cfg;
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace obstacle
