#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obstacle/experiments.hpp"

using namespace obstacle;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json base_config_json() {
  return nlohmann::json{
      {"nonlinearity", {{"kind", "power"}, {"p", 3.0}}},
      {"potential",
       {{"kind", "well"}, {"o_left", -1.0}, {"o_right", 1.0}, {"cap", 1.0}, {"slope", 1.0}}},
      {"obstacle",
       {{"kind", "bump"}, {"center", 0.0}, {"halfwidth", 0.5}, {"amplitude", 0.18}}},
      {"penalization", {{"k", 4.0}, {"omega_left", -1.5}, {"omega_right", 1.5}}},
      {"lambda", 1.0},
      {"L", 8.0},
      {"r", 1.0},
      {"mesh", {{"n", 201}}},
      {"sweep", {{"lambdas", {1.0, 100.0}}}}};
}

SweepConfig mini_config() {
  SweepConfig cfg = parse_config(base_config_json());
  return cfg;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int run_cli(const std::string& args) {
#ifdef OBSTACLE_CLI_PATH
  const std::string cmd = std::string(OBSTACLE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
#else
  (void)args;
  return -1;
#endif
}

}  // namespace

TEST_CASE("config parsing covers defaults and rejects mistakes", "[experiments][config]") {
  SECTION("empty document yields the default instance") {
    const SweepConfig cfg = parse_config(nlohmann::json::object());
    CHECK(cfg.mesh_n == 2001);
    CHECK(cfg.lambdas == std::vector<double>{1.0, 3.16, 10.0, 31.6, 100.0, 316.0, 1000.0});
    CHECK(cfg.instance.penalization.a == Approx(0.5).margin(1e-12));
    CHECK(cfg.instance.domain_halfwidth == 8.0);
    CHECK(cfg.instance.ball_radius == 1.0);
  }
  SECTION("full document round-trips") {
    const SweepConfig cfg = mini_config();
    CHECK(cfg.mesh_n == 201);
    CHECK(cfg.lambdas == std::vector<double>{1.0, 100.0});
    CHECK(cfg.instance.obstacle.amplitude() == 0.18);
  }
  SECTION("unknown keys are rejected") {
    nlohmann::json j = base_config_json();
    j["mesh"]["cells"] = 7;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    nlohmann::json j2 = base_config_json();
    j2["misc"] = 1;
    CHECK_THROWS_AS(parse_config(j2), ConfigError);
  }
  SECTION("sweep ladder must be increasing and positive") {
    nlohmann::json j = base_config_json();
    j["sweep"]["lambdas"] = {10.0, 1.0};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["sweep"]["lambdas"] = {-1.0, 1.0};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SECTION("power nonlinearity pins theta to p + 1") {
    nlohmann::json j = base_config_json();
    j["nonlinearity"]["theta"] = 4.5;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["nonlinearity"]["theta"] = 4.0;
    CHECK_NOTHROW(parse_config(j));
  }
  SECTION("tabulated kinds require their tables") {
    nlohmann::json j = base_config_json();
    j["nonlinearity"] = {{"kind", "tabulated"}, {"theta", 4.0}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    std::vector<double> ts, fsamp;
    for (int i = 0; i <= 40; ++i) {
      ts.push_back(2.0 * i / 40.0);
      fsamp.push_back(ts.back() * ts.back() * ts.back());
    }
    j["nonlinearity"] = {
        {"kind", "tabulated"}, {"theta", 4.0}, {"t", ts}, {"f", fsamp}};
    CHECK_NOTHROW(parse_config(j));
  }
  SECTION("solver method names are validated") {
    nlohmann::json j = base_config_json();
    j["solver"] = {{"method", "newton"}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["solver"] = {{"method", "semismooth_newton"}};
    CHECK(parse_config(j).solver.method == SolveMethod::semismooth_newton);
  }
}

TEST_CASE("instance checks aggregate hypotheses and geometry", "[experiments]") {
  const SweepConfig cfg = mini_config();
  CHECK(check_instance(cfg.instance).all_pass());

  SweepConfig bad = cfg;
  bad.instance.penalization.omega_left = -1.0;
  bad.instance.penalization.omega_right = 1.0;
  const ValidationReport rep = check_instance(bad.instance);
  CHECK_FALSE(rep.all_pass());
  CHECK_THROWS_AS(require_valid(rep), HypothesisViolated);
}

TEST_CASE("both first-solution routes satisfy the same contract", "[experiments]") {
  SweepConfig cfg = mini_config();
  cfg.instance.lambda = 100.0;
  const auto mesh = build_mesh(cfg.instance, cfg.mesh_n);
  const DiscreteOperator op = assemble(cfg.instance, mesh);
  const SolveReport pg = solve_first(cfg.instance, op, cfg.solver);
  SolverOptions nopts = cfg.solver;
  nopts.method = SolveMethod::semismooth_newton;
  const SolveReport nw = solve_first(cfg.instance, op, nopts);
  REQUIRE(pg.converged);
  REQUIRE(nw.converged);
  CHECK(std::abs(pg.energy - nw.energy) < 1e-10);
}

TEST_CASE("sweep writes the documented artifact set deterministically",
          "[experiments][sweep]") {
  SweepConfig cfg = mini_config();
  const fs::path dir_a = fresh_dir("obstacle_sweep_a");
  cfg.out_dir = dir_a.string();
  const TheoremVerdict verdict = run_sweep(cfg);

  REQUIRE(verdict.rows.size() == 2);
  for (const auto& r : verdict.rows) {
    INFO("lambda " << r.lambda << " error: " << r.error);
    CHECK(r.error.empty());
    CHECK(r.converged_u);
    CHECK(r.converged_w);
  }

  SECTION("theorem verdict matches the known transition") {
    // at lambda = 1 the second solution pokes above a off Omega
    CHECK(verdict.rows[0].solves_u);
    CHECK_FALSE(verdict.rows[0].solves_w);
    CHECK(verdict.rows[1].solves_u);
    CHECK(verdict.rows[1].solves_w);
    REQUIRE(verdict.lambda_star.has_value());
    CHECK(*verdict.lambda_star == 100.0);
    REQUIRE(verdict.lambda_star_bracket_low.has_value());
    CHECK(*verdict.lambda_star_bracket_low == 1.0);
    CHECK(verdict.all_converged());
  }

  SECTION("artifact files exist with the declared names") {
    for (const char* f :
         {"summary.csv", "verdict.json", "limit.csv", "limit.json",
          "summary_solutions.svg", "summary_energies.svg", "summary_concentration.svg",
          "lambda_1/u.csv", "lambda_1/u.json", "lambda_1/w.csv", "lambda_1/w.json",
          "lambda_100/u.csv", "lambda_100/w.csv"})
      CHECK(fs::exists(dir_a / f));
    CHECK(slurp(dir_a / "summary_solutions.svg").substr(0, 4) == "<svg");
  }

  SECTION("summary CSV has the pinned header and recomputable flags") {
    std::ifstream is(dir_a / "summary.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "lambda,I_u,I_w,rho,sigma,norm_u,norm_w,loc_max_u,loc_max_w,a,conc_u,conc_w,"
          "linf_u,linf_w,dist_limit_u,solves_u,solves_w,converged_u,converged_w");
    std::size_t row_idx = 0;
    for (std::string line; std::getline(is, line); ++row_idx) {
      const auto cells = split_csv(line);
      REQUIRE(cells.size() == 19);
      const double loc_u = std::stod(cells[7]);
      const double loc_w = std::stod(cells[8]);
      const double a = std::stod(cells[9]);
      CHECK((std::stoi(cells[15]) == 1) == (loc_u <= a));
      CHECK((std::stoi(cells[16]) == 1) == (loc_w <= a));
    }
    CHECK(row_idx == verdict.rows.size());
  }

  SECTION("repeated runs and worker counts produce identical bytes") {
    SweepConfig cfg_b = mini_config();
    const fs::path dir_b = fresh_dir("obstacle_sweep_b");
    cfg_b.out_dir = dir_b.string();
    run_sweep(cfg_b);
    CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
    CHECK(slurp(dir_a / "verdict.json") == slurp(dir_b / "verdict.json"));
    for (const char* f :
         {"summary_solutions.svg", "summary_energies.svg", "summary_concentration.svg"})
      CHECK(slurp(dir_a / f) == slurp(dir_b / f));

    SweepConfig cfg_c = mini_config();
    const fs::path dir_c = fresh_dir("obstacle_sweep_c");
    cfg_c.out_dir = dir_c.string();
    cfg_c.workers = 2;
    run_sweep(cfg_c);
    CHECK(slurp(dir_a / "summary.csv") == slurp(dir_c / "summary.csv"));
    fs::remove_all(dir_b);
    fs::remove_all(dir_c);
  }

  fs::remove_all(dir_a);
}

TEST_CASE("an empty sweep emits no plot files", "[experiments]") {
  const fs::path dir = fresh_dir("obstacle_sweep_empty");
  const TheoremVerdict empty;
  emit_plots(empty, {}, ProblemInstance::default_instance(), dir.string());
  CHECK(fs::is_empty(dir));
  fs::remove_all(dir);
}

#ifdef OBSTACLE_CLI_PATH
TEST_CASE("command line drives the documented workflows", "[experiments][cli]") {
  const fs::path dir = fresh_dir("obstacle_cli_test");
  const fs::path cfg_path = dir / "config.json";
  {
    std::ofstream os(cfg_path);
    os << base_config_json().dump(2);
  }

  SECTION("validate accepts the default and rejects broken geometry") {
    CHECK(run_cli("validate " + cfg_path.string()) == 0);
    nlohmann::json bad = base_config_json();
    bad["penalization"]["omega_left"] = -1.0;
    bad["penalization"]["omega_right"] = 1.0;
    const fs::path bad_path = dir / "bad.json";
    std::ofstream(bad_path) << bad.dump();
    CHECK(run_cli("validate " + bad_path.string()) == 3);
    CHECK(run_cli("validate " + (dir / "missing.json").string()) == 3);
  }

  SECTION("solve produces both solutions at the requested lambda") {
    const fs::path out = dir / "solve_out";
    CHECK(run_cli("solve " + cfg_path.string() + " --lambda 100 --out " + out.string() +
                  " --trace") == 0);
    for (const char* f : {"u.csv", "u.json", "w.csv", "w.json", "path_trace.csv"})
      CHECK(fs::exists(out / f));
    const nlohmann::json ju = nlohmann::json::parse(slurp(out / "u.json"));
    CHECK(ju.at("converged").get<bool>());
    CHECK(ju.at("lambda").get<double>() == 100.0);
    const nlohmann::json jw = nlohmann::json::parse(slurp(out / "w.json"));
    CHECK(jw.at("c_lambda").get<double>() >= jw.at("rho").get<double>());
  }

  SECTION("sweep and oracle run end to end") {
    const fs::path out = dir / "sweep_out";
    CHECK(run_cli("sweep " + cfg_path.string() + " --out " + out.string() +
                  " --workers 2") == 0);
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(run_cli("oracle " + cfg_path.string() + " --n 12") == 0);
  }

  fs::remove_all(dir);
}
#endif
