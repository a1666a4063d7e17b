// Sweep driver: solves both solutions per lambda, checks the theorem-level
// claims (localization below the threshold a, energy separation,
// concentration decay, convergence to the limit problem on O), detects the
// lambda* transition and emits CSV / JSON / SVG artifacts.

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "obstacle/config.hpp"
#include "obstacle/detail/svg.hpp"
#include "obstacle/discretize.hpp"
#include "obstacle/errors.hpp"
#include "obstacle/model.hpp"
#include "obstacle/mountain_pass.hpp"
#include "obstacle/vi_solver.hpp"

namespace obstacle {

/// Per-lambda verdict row; mirrors one line of the summary CSV.
struct LambdaRecord {
  double lambda = 0.0;
  double I_u = 0.0, I_w = 0.0;
  double rho = 0.0, sigma = 0.0;
  double norm_u = 0.0, norm_w = 0.0;
  double loc_max_u = 0.0, loc_max_w = 0.0;
  double a = 0.0;
  double conc_u = 0.0, conc_w = 0.0;
  double linf_u = 0.0, linf_w = 0.0;
  double dist_limit_u = 0.0;
  bool solves_u = false, solves_w = false;      // loc_max_* <= a
  bool converged_u = false, converged_w = false;
  std::string error;  // nonempty when this lambda failed
};

struct TheoremVerdict {
  std::vector<LambdaRecord> rows;
  std::optional<double> lambda_star;          // first sweep lambda of the passing tail
  std::optional<double> lambda_star_bracket_low;  // sweep value just below it

  bool all_converged() const {
    for (const auto& r : rows)
      if (!(r.converged_u && r.converged_w && r.error.empty())) return false;
    return true;
  }
};

/// Solutions kept for plotting.
struct LambdaSolutions {
  double lambda = 0.0;
  bool ok_u = false, ok_w = false;
  DiscreteFunction u, w;
};
using SweepSolutions = std::vector<LambdaSolutions>;

/// Hypothesis checks plus set geometry; a failing report aborts solver runs.
inline ValidationReport check_instance(const ProblemInstance& inst,
                                       std::size_t samples = 10000) {
  ValidationReport rep = validate_hypotheses(inst, samples);
  ValidationReport geo = validate_geometry(inst);
  rep.checks.insert(rep.checks.end(), geo.checks.begin(), geo.checks.end());
  return rep;
}

/// First solution with the chosen method; both routes enforce the Theorem
/// 3.1 postconditions (ball bound and nonnegativity).
inline SolveReport solve_first(const ProblemInstance& inst, const DiscreteOperator& op,
                               const SolverOptions& opts) {
  if (opts.method == SolveMethod::projected_gradient) return solve_min(inst, op, opts);
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  DiscreteFunction u0 = project_K(DiscreteFunction::zeros(op.mesh_ptr()), phi);
  u0.values.front() = u0.values.back() = 0.0;
  SolveReport rep = semismooth_newton(inst, op, u0, opts);
  if (rep.converged) {
    if (rep.lambda_norm >= inst.ball_radius)
      throw BallViolation("||u||_lambda >= r after semismooth solve");
    double min_u = 0.0;
    for (double v : rep.solution.values) min_u = std::min(min_u, v);
    if (min_u < -std::max(1e-10, 10.0 * opts.tol))
      throw Error("minimizer lost nonnegativity: min u = " + std::to_string(min_u));
  }
  return rep;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string lambda_tag(double lambda) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

inline nlohmann::json report_to_json(const SolveReport& rep, const ProblemInstance& inst,
                                     const DiscreteOperator& op,
                                     const std::string& solution_csv) {
  nlohmann::json j;
  j["lambda"] = inst.lambda;
  j["energy"] = rep.energy;
  j["lambda_norm"] = rep.lambda_norm;
  j["comp_residual"] = rep.comp_residual;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["status"] = rep.converged ? "converged" : "max_iter_exceeded";
  j["active_set"] = rep.active_set;
  j["localization_max"] = rep.localization_max;
  j["concentration"] = rep.concentration;
  j["linf_off_O"] = rep.linf_off_O;
  j["threshold_a"] = inst.penalization.a;
  j["solves_original"] = rep.localization_max <= inst.penalization.a;
  j["boundary_layer_mass"] = boundary_layer_mass(op, rep.solution);
  j["solution_csv"] = solution_csv;
  return j;
}

inline void dump_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IOFailure("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw IOFailure("write failed for " + path);
}

inline const char* kSummaryHeader =
    "lambda,I_u,I_w,rho,sigma,norm_u,norm_w,loc_max_u,loc_max_w,a,conc_u,conc_w,"
    "linf_u,linf_w,dist_limit_u,solves_u,solves_w,converged_u,converged_w";

inline void write_summary_csv(const TheoremVerdict& verdict, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IOFailure("cannot open " + path + " for writing");
  os << kSummaryHeader << "\n";
  for (const auto& r : verdict.rows) {
    os << fmt17(r.lambda) << ',' << fmt17(r.I_u) << ',' << fmt17(r.I_w) << ','
       << fmt17(r.rho) << ',' << fmt17(r.sigma) << ',' << fmt17(r.norm_u) << ','
       << fmt17(r.norm_w) << ',' << fmt17(r.loc_max_u) << ',' << fmt17(r.loc_max_w) << ','
       << fmt17(r.a) << ',' << fmt17(r.conc_u) << ',' << fmt17(r.conc_w) << ','
       << fmt17(r.linf_u) << ',' << fmt17(r.linf_w) << ',' << fmt17(r.dist_limit_u) << ','
       << (r.solves_u ? 1 : 0) << ',' << (r.solves_w ? 1 : 0) << ','
       << (r.converged_u ? 1 : 0) << ',' << (r.converged_w ? 1 : 0) << "\n";
  }
  if (!os) throw IOFailure("write failed for " + path);
}

inline nlohmann::json verdict_to_json(const TheoremVerdict& v) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : v.rows) {
    nlohmann::json jr;
    jr["lambda"] = r.lambda;
    jr["I_u"] = r.I_u;
    jr["I_w"] = r.I_w;
    jr["rho"] = r.rho;
    jr["sigma"] = r.sigma;
    jr["norm_u"] = r.norm_u;
    jr["norm_w"] = r.norm_w;
    jr["loc_max_u"] = r.loc_max_u;
    jr["loc_max_w"] = r.loc_max_w;
    jr["a"] = r.a;
    jr["conc_u"] = r.conc_u;
    jr["conc_w"] = r.conc_w;
    jr["linf_u"] = r.linf_u;
    jr["linf_w"] = r.linf_w;
    jr["dist_limit_u"] = r.dist_limit_u;
    jr["solves_u"] = r.solves_u;
    jr["solves_w"] = r.solves_w;
    jr["converged_u"] = r.converged_u;
    jr["converged_w"] = r.converged_w;
    if (!r.error.empty()) jr["error"] = r.error;
    rows.push_back(std::move(jr));
  }
  nlohmann::json j;
  j["rows"] = std::move(rows);
  j["lambda_star"] = v.lambda_star ? nlohmann::json(*v.lambda_star) : nlohmann::json();
  j["lambda_star_bracket_low"] =
      v.lambda_star_bracket_low ? nlohmann::json(*v.lambda_star_bracket_low)
                                : nlohmann::json();
  return j;
}

}  // namespace detail

/// Writes the three sweep plots. An empty verdict writes nothing.
inline void emit_plots(const TheoremVerdict& verdict, const SweepSolutions& sols,
                       const ProblemInstance& inst, const std::string& out_dir) {
  if (verdict.rows.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string base = out_dir + "/";

  static const char* kBlues[] = {"#c6dbef", "#9ecae1", "#6baed6", "#4292c6",
                                 "#2171b5", "#08519c", "#08306b"};
  static const char* kReds[] = {"#fcbba1", "#fc9272", "#fb6a4a", "#ef3b2c",
                                "#cb181d", "#a50f15", "#67000d"};

  {  // solutions overlaid with the obstacle and the threshold band
    detail::SvgPlot plot("solutions u (blue), w (red), obstacle phi", "x", "value",
                         false, false);
    const double L = inst.domain_halfwidth;
    const double wl = inst.penalization.omega_left, wr = inst.penalization.omega_right;
    const double a = inst.penalization.a;
    for (std::size_t s = 0; s < sols.size(); ++s) {
      const auto pick = [&](const char* const* pal) {
        return std::string(pal[s % 7]);
      };
      if (sols[s].ok_u) {
        detail::Series su;
        su.name = s + 1 == sols.size() ? "u_lambda" : "";
        su.color = pick(kBlues);
        for (std::size_t i = 0; i < sols[s].u.size(); ++i)
          su.pts.emplace_back(sols[s].u.mesh->nodes[i], sols[s].u.values[i]);
        plot.add(std::move(su));
      }
      if (sols[s].ok_w) {
        detail::Series sw;
        sw.name = s + 1 == sols.size() ? "w_lambda" : "";
        sw.color = pick(kReds);
        for (std::size_t i = 0; i < sols[s].w.size(); ++i)
          sw.pts.emplace_back(sols[s].w.mesh->nodes[i], sols[s].w.values[i]);
        plot.add(std::move(sw));
      }
    }
    {
      detail::Series sphi;
      sphi.name = "phi";
      sphi.color = "#555555";
      sphi.dashed = true;
      const int nphi = 513;
      for (int i = 0; i < nphi; ++i) {
        const double x = -L + 2.0 * L * double(i) / double(nphi - 1);
        sphi.pts.emplace_back(x, inst.obstacle.phi(x));
      }
      plot.add(std::move(sphi));
    }
    for (int side = 0; side < 2; ++side) {
      detail::Series sa;
      sa.name = side == 0 ? "a on Omega^c" : "";
      sa.color = "#111111";
      sa.dashed = true;
      if (side == 0) {
        sa.pts.emplace_back(-L, a);
        sa.pts.emplace_back(wl, a);
      } else {
        sa.pts.emplace_back(wr, a);
        sa.pts.emplace_back(L, a);
      }
      plot.add(std::move(sa));
    }
    plot.write(base + "summary_solutions.svg");
  }

  {  // energy levels vs lambda
    detail::SvgPlot plot("energy levels", "lambda", "energy", true, false);
    detail::Series iu{"I_u", "#2171b5", {}, false, true};
    detail::Series iw{"I_w", "#cb181d", {}, false, true};
    detail::Series sg{"Sigma", "#66aa66", {}, true, false};
    for (const auto& r : verdict.rows) {
      if (r.converged_u) iu.pts.emplace_back(r.lambda, r.I_u);
      if (r.converged_w) iw.pts.emplace_back(r.lambda, r.I_w);
      sg.pts.emplace_back(r.lambda, r.sigma);
    }
    plot.add(std::move(iu));
    plot.add(std::move(iw));
    plot.add(std::move(sg));
    plot.hline(verdict.rows.front().rho, "rho", "#aa7700");
    plot.write(base + "summary_energies.svg");
  }

  {  // concentration metrics vs lambda
    detail::SvgPlot plot("concentration and localization", "lambda", "value", true, true);
    detail::Series cu{"conc_u", "#2171b5", {}, false, true};
    detail::Series cw{"conc_w", "#cb181d", {}, false, true};
    detail::Series lu{"linf_u", "#2171b5", {}, true, false};
    detail::Series lw{"linf_w", "#cb181d", {}, true, false};
    detail::Series dl{"dist_limit_u", "#555555", {}, false, true};
    for (const auto& r : verdict.rows) {
      if (r.converged_u) {
        cu.pts.emplace_back(r.lambda, r.conc_u);
        lu.pts.emplace_back(r.lambda, r.linf_u);
        dl.pts.emplace_back(r.lambda, r.dist_limit_u);
      }
      if (r.converged_w) {
        cw.pts.emplace_back(r.lambda, r.conc_w);
        lw.pts.emplace_back(r.lambda, r.linf_w);
      }
    }
    plot.add(std::move(cu));
    plot.add(std::move(cw));
    plot.add(std::move(lu));
    plot.add(std::move(lw));
    plot.add(std::move(dl));
    plot.write(base + "summary_concentration.svg");
  }
}

/// Runs the full sweep. Per-lambda failures are recorded in the verdict
/// without aborting the rest of the ladder; files are written only when
/// cfg.out_dir is nonempty, by a single writer after all workers join.
inline TheoremVerdict run_sweep(const SweepConfig& cfg) {
  require_valid(check_instance(cfg.instance));

  const std::size_t nl = cfg.lambdas.size();
  TheoremVerdict verdict;
  verdict.rows.resize(nl);
  SweepSolutions sols(nl);
  std::vector<nlohmann::json> json_u(nl), json_w(nl);

  auto mesh = build_mesh(cfg.instance, cfg.mesh_n);

  // lambda-free limit problem, solved once
  ProblemInstance inst0 = cfg.instance;
  inst0.lambda = cfg.lambdas.empty() ? cfg.instance.lambda : cfg.lambdas.front();
  const DiscreteOperator op0 = assemble(inst0, mesh);
  const LimitProblem limit = solve_limit_problem(cfg.instance, op0, cfg.solver);

  std::atomic<std::size_t> next{0};
  auto task = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= nl) return;
      LambdaRecord& row = verdict.rows[i];
      row.lambda = cfg.lambdas[i];
      row.a = cfg.instance.penalization.a;
      row.rho = cfg.instance.rho();
      sols[i].lambda = row.lambda;
      ProblemInstance inst = cfg.instance;
      inst.lambda = row.lambda;
      try {
        const DiscreteOperator op = assemble(inst, mesh);
        SolveReport ur = solve_first(inst, op, cfg.solver);
        row.converged_u = ur.converged;
        row.I_u = ur.energy;
        row.norm_u = ur.lambda_norm;
        row.loc_max_u = ur.localization_max;
        row.conc_u = ur.concentration;
        row.linf_u = ur.linf_off_O;
        row.solves_u = ur.localization_max <= inst.penalization.a;
        row.dist_limit_u = h1_distance_to_limit(op, ur.solution, limit);
        json_u[i] = detail::report_to_json(ur, inst, op, "u.csv");
        sols[i].u = ur.solution;
        sols[i].ok_u = true;

        const DiscreteFunction e = build_endpoint(inst, op, ur.energy);
        const DiscreteFunction phi = obstacle_values(mesh, inst);
        MountainPath path =
            initial_path(ur.solution, e, cfg.mountain_pass.path_points, phi, op, inst);
        MountainPassReport wr = deform(path, op, inst, cfg.mountain_pass);
        row.converged_w = wr.converged;
        row.I_w = wr.c_lambda;
        row.sigma = wr.sigma_bound;
        row.norm_w = wr.lambda_norm;
        row.loc_max_w = wr.localization_max;
        row.conc_w = wr.concentration;
        row.linf_w = wr.linf_off_O;
        row.solves_w = wr.localization_max <= inst.penalization.a;
        SolveReport wsr;
        wsr.solution = wr.solution;
        wsr.energy = wr.c_lambda;
        wsr.lambda_norm = wr.lambda_norm;
        wsr.comp_residual = wr.comp_residual;
        wsr.iterations = wr.iterations;
        wsr.status = wr.status;
        wsr.converged = wr.converged;
        wsr.localization_max = wr.localization_max;
        wsr.concentration = wr.concentration;
        wsr.linf_off_O = wr.linf_off_O;
        wsr.active_set = wr.active_set;
        json_w[i] = detail::report_to_json(wsr, inst, op, "w.csv");
        json_w[i]["c_lambda"] = wr.c_lambda;
        json_w[i]["rho"] = wr.rho;
        json_w[i]["sigma_bound"] = wr.sigma_bound;
        sols[i].w = wr.solution;
        sols[i].ok_w = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t nworkers =
      std::max<std::size_t>(1, std::min<std::size_t>(cfg.workers, std::max(nl, std::size_t{1})));
  if (nworkers <= 1) {
    task();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nworkers; ++t) pool.emplace_back(task);
    for (auto& th : pool) th.join();
  }

  // lambda*: smallest sweep lambda from which every larger one passes
  std::size_t tail = nl;
  for (std::size_t i = nl; i-- > 0;) {
    const LambdaRecord& r = verdict.rows[i];
    if (r.error.empty() && r.converged_u && r.converged_w && r.solves_u && r.solves_w)
      tail = i;
    else
      break;
  }
  if (tail < nl) {
    verdict.lambda_star = verdict.rows[tail].lambda;
    if (tail > 0) verdict.lambda_star_bracket_low = verdict.rows[tail - 1].lambda;
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    detail::write_summary_csv(verdict, cfg.out_dir + "/summary.csv");
    detail::dump_json(detail::verdict_to_json(verdict), cfg.out_dir + "/verdict.json");
    write_csv(extend_by_zero(limit, mesh), cfg.out_dir + "/limit.csv");
    nlohmann::json jl = detail::report_to_json(limit.report, limit.instance,
                                               assemble(limit.instance, limit.mesh),
                                               "limit.csv");
    detail::dump_json(jl, cfg.out_dir + "/limit.json");
    for (std::size_t i = 0; i < nl; ++i) {
      const std::string dir =
          cfg.out_dir + "/lambda_" + detail::lambda_tag(cfg.lambdas[i]);
      fs::create_directories(dir);
      if (sols[i].ok_u) {
        write_csv(sols[i].u, dir + "/u.csv");
        detail::dump_json(json_u[i], dir + "/u.json");
      }
      if (sols[i].ok_w) {
        write_csv(sols[i].w, dir + "/w.csv");
        detail::dump_json(json_w[i], dir + "/w.json");
      }
      if (!verdict.rows[i].error.empty()) {
        nlohmann::json je;
        je["lambda"] = cfg.lambdas[i];
        je["error"] = verdict.rows[i].error;
        detail::dump_json(je, dir + "/error.json");
      }
    }
    emit_plots(verdict, sols, cfg.instance, cfg.out_dir);
  }
  return verdict;
}

}  // namespace obstacle
