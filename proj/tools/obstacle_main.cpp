// Command-line driver: validate a configuration, solve both solutions at a
// single lambda, run the full lambda sweep, or enumerate every KKT point on
// a tiny mesh.
//
// Usage:
//   obstacle validate <config.json>
//   obstacle solve    <config.json> --lambda X --out DIR [--trace]
//   obstacle sweep    <config.json> --out DIR [--workers N]
//   obstacle oracle   <config.json> --n 12 [--out DIR]
//
// Exit codes: 0 converged / valid, 2 partial or unconverged, 3 invalid
// configuration, failed hypothesis or ball violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "obstacle/config.hpp"
#include "obstacle/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 2;
constexpr int kInvalid = 3;

void print_report(const obstacle::ValidationReport& rep) {
  for (const auto& c : rep.checks) {
    std::printf("%-32s %s  margin=% .3e", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                c.margin);
    if (!c.pass) std::printf("  witness x=%g t=%g", c.witness_x, c.witness_t);
    if (!c.detail.empty()) std::printf("  (%s)", c.detail.c_str());
    std::printf("\n");
  }
}

int run_validate(const std::string& config_path) {
  const obstacle::SweepConfig cfg = obstacle::load_config(config_path);
  const obstacle::ValidationReport rep = obstacle::check_instance(cfg.instance);
  print_report(rep);
  std::printf("instance: %s\n", rep.all_pass() ? "VALID" : "INVALID");
  return rep.all_pass() ? kOk : kInvalid;
}

int run_solve(const std::string& config_path, double lambda, bool has_lambda,
              const std::string& out_dir, bool trace) {
  obstacle::SweepConfig cfg = obstacle::load_config(config_path);
  if (has_lambda) cfg.instance.lambda = lambda;
  cfg.mountain_pass.record_trace = trace;
  obstacle::require_valid(obstacle::check_instance(cfg.instance));

  const auto mesh = obstacle::build_mesh(cfg.instance, cfg.mesh_n);
  const obstacle::DiscreteOperator op = obstacle::assemble(cfg.instance, mesh);
  const obstacle::SolveReport ur = obstacle::solve_first(cfg.instance, op, cfg.solver);
  std::printf("u_lambda: energy=%.12g |u|_lambda=%.12g residual=%.3e iters=%d %s\n",
              ur.energy, ur.lambda_norm, ur.comp_residual, ur.iterations,
              ur.converged ? "converged" : "NOT CONVERGED");

  const obstacle::DiscreteFunction e =
      obstacle::build_endpoint(cfg.instance, op, ur.energy);
  const obstacle::DiscreteFunction phi = obstacle::obstacle_values(mesh, cfg.instance);
  obstacle::MountainPath path = obstacle::initial_path(
      ur.solution, e, cfg.mountain_pass.path_points, phi, op, cfg.instance);
  const obstacle::MountainPassReport wr =
      obstacle::deform(path, op, cfg.instance, cfg.mountain_pass);
  std::printf("w_lambda: c=%.12g rho=%.12g sigma=%.12g residual=%.3e sweeps=%d %s\n",
              wr.c_lambda, wr.rho, wr.sigma_bound, wr.comp_residual, wr.iterations,
              wr.converged ? "converged" : "NOT CONVERGED");
  std::printf("distinct: %s\n",
              obstacle::distinct_solutions(op, ur.solution, ur.energy, wr.solution,
                                           wr.c_lambda)
                  ? "yes"
                  : "no");

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    obstacle::write_csv(ur.solution, out_dir + "/u.csv");
    obstacle::detail::dump_json(
        obstacle::detail::report_to_json(ur, cfg.instance, op, "u.csv"),
        out_dir + "/u.json");
    obstacle::write_csv(wr.solution, out_dir + "/w.csv");
    obstacle::SolveReport wsr;
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
    nlohmann::json jw =
        obstacle::detail::report_to_json(wsr, cfg.instance, op, "w.csv");
    jw["c_lambda"] = wr.c_lambda;
    jw["rho"] = wr.rho;
    jw["sigma_bound"] = wr.sigma_bound;
    obstacle::detail::dump_json(jw, out_dir + "/w.json");
    if (trace) {
      std::ofstream ts(out_dir + "/path_trace.csv");
      ts << "sweep,peak_energy,residual\n";
      for (const auto& row : wr.trace)
        ts << row.sweep << ',' << obstacle::detail::fmt17(row.peak_energy) << ','
           << obstacle::detail::fmt17(row.residual) << "\n";
    }
  }
  return (ur.converged && wr.converged) ? kOk : kPartial;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir, int workers) {
  obstacle::SweepConfig cfg = obstacle::load_config(config_path);
  cfg.out_dir = out_dir;
  cfg.workers = workers;
  const obstacle::TheoremVerdict verdict = obstacle::run_sweep(cfg);
  for (const auto& r : verdict.rows) {
    if (!r.error.empty()) {
      std::printf("lambda=%-8g FAILED: %s\n", r.lambda, r.error.c_str());
      continue;
    }
    std::printf("lambda=%-8g I_u=%.6g I_w=%.6g loc_u=%.4g loc_w=%.4g a=%.4g "
                "solves=%d/%d conc_u=%.3e dist_limit=%.3e\n",
                r.lambda, r.I_u, r.I_w, r.loc_max_u, r.loc_max_w, r.a,
                int(r.solves_u), int(r.solves_w), r.conc_u, r.dist_limit_u);
  }
  if (verdict.lambda_star) {
    if (verdict.lambda_star_bracket_low)
      std::printf("lambda* in (%g, %g]\n", *verdict.lambda_star_bracket_low,
                  *verdict.lambda_star);
    else
      std::printf("lambda* <= %g (all sweep values pass)\n", *verdict.lambda_star);
  } else {
    std::printf("lambda* not detected within the sweep\n");
  }
  return verdict.all_converged() ? kOk : kPartial;
}

int run_oracle(const std::string& config_path, std::size_t n, const std::string& out_dir) {
  obstacle::SweepConfig cfg = obstacle::load_config(config_path);
  obstacle::require_valid(obstacle::check_instance(cfg.instance));
  const auto mesh = obstacle::build_mesh(cfg.instance, n);
  const obstacle::DiscreteOperator op = obstacle::assemble(cfg.instance, mesh);
  const auto reports = obstacle::oracle_enumerate(cfg.instance, op);
  std::printf("%zu KKT point(s) on the n=%zu mesh (lambda=%g):\n", reports.size(), n,
              cfg.instance.lambda);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::printf("  #%zu energy=%.12g |u|_lambda=%.12g residual=%.3e actives=%zu\n", i,
                r.energy, r.lambda_norm, r.comp_residual, r.active_set.size());
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::string csv = "oracle_" + std::to_string(i) + ".csv";
      obstacle::write_csv(reports[i].solution, out_dir + "/" + csv);
      j.push_back(obstacle::detail::report_to_json(reports[i], cfg.instance, op, csv));
    }
    obstacle::detail::dump_json(j, out_dir + "/oracle.json");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two positive solutions of the obstacle problem on the line"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  double lambda = 0.0;
  bool trace = false;
  int workers = 1;
  std::size_t oracle_n = 12;

  CLI::App* validate = app.add_subcommand("validate", "check hypotheses and geometry");
  validate->add_option("config", config_path, "JSON configuration")->required();

  CLI::App* solve = app.add_subcommand("solve", "solve both solutions at one lambda");
  solve->add_option("config", config_path, "JSON configuration")->required();
  CLI::Option* lam_opt = solve->add_option("--lambda", lambda, "override lambda");
  solve->add_option("--out", out_dir, "output directory");
  solve->add_flag("--trace", trace, "write per-sweep mountain-pass trace CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "run the lambda sweep");
  sweep->add_option("config", config_path, "JSON configuration")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--workers", workers, "concurrent lambda solves");

  CLI::App* oracle = app.add_subcommand("oracle", "enumerate KKT points on a tiny mesh");
  oracle->add_option("config", config_path, "JSON configuration")->required();
  oracle->add_option("--n", oracle_n, "mesh size (<= 14)");
  oracle->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(config_path);
    if (solve->parsed())
      return run_solve(config_path, lambda, lam_opt->count() > 0, out_dir, trace);
    if (sweep->parsed()) return run_sweep_cmd(config_path, out_dir, workers);
    if (oracle->parsed()) return run_oracle(config_path, oracle_n, out_dir);
  } catch (const obstacle::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kInvalid;
  } catch (const obstacle::HypothesisViolated& e) {
    std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
    return kInvalid;
  } catch (const obstacle::BallViolation& e) {
    std::fprintf(stderr, "ball violation: %s\n", e.what());
    return kInvalid;
  } catch (const obstacle::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPartial;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return kPartial;
  }
  return kOk;
}
