#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "obstacle/discretize.hpp"
#include "test_util.hpp"

using namespace obstacle;
using Catch::Approx;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

DiscreteFunction random_feasible(const DiscreteFunction& phi, double amp) {
  DiscreteFunction u = phi;
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    u.values[i] = std::max(phi.values[i], 0.0) + amp * test_util::uniform(0.0, 1.0);
  u.values.front() = u.values.back() = 0.0;
  return u;
}

}  // namespace

TEST_CASE("mesh builder aligns breakpoints and is deterministic", "[discretize]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  const auto mesh = build_mesh(inst, 2001);
  REQUIRE(mesh->size() == 2001);
  for (double b : {-8.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 8.0})
    CHECK_NOTHROW(mesh->index_of(b));
  for (double h : mesh->spacing) CHECK(h > 0.0);

  const auto mesh2 = build_mesh(inst, 2001);
  CHECK(mesh->nodes == mesh2->nodes);

  CHECK_THROWS_AS(build_mesh(inst, 5), ConfigError);  // cannot align 8 breakpoints
}

TEST_CASE("from_nodes validates ordering", "[discretize]") {
  CHECK_THROWS_AS(Mesh::from_nodes({0.0, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(Mesh::from_nodes({0.0, 1.0}), ConfigError);
  const auto m = Mesh::from_nodes({-2.0, -1.0, 0.0, 1.0, 2.0});
  CHECK(m->spacing == std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(m->index_of(0.25), ConfigError);
}

TEST_CASE("assembly with lambda = 0 drops the potential", "[discretize]") {
  ProblemInstance inst = ProblemInstance::default_instance();
  inst.lambda = 0.0;
  const auto mesh = build_mesh(inst, 257);
  const DiscreteOperator op = assemble(inst, mesh);
  DiscreteFunction one = DiscreteFunction::interpolate(mesh, [](double) { return 1.0; });
  // stiffness of a constant vanishes; lumped mass sums to the domain length
  CHECK(op.norm_lambda_sq(one) == Approx(16.0).margin(1e-12));
  CHECK(op.h1_norm_sq(one) == Approx(16.0).margin(1e-12));
}

TEST_CASE("interior stiffness row has the P1 stencil", "[discretize]") {
  ProblemInstance inst = ProblemInstance::default_instance();
  inst.lambda = 0.0;
  const auto mesh = Mesh::from_nodes(linspace(-8.0, 8.0, 65));
  const double dx = mesh->spacing[0];
  const DiscreteOperator op = assemble(inst, mesh);
  // basis vector at an interior node away from the potential well
  DiscreteFunction e = DiscreteFunction::zeros(mesh);
  const std::size_t i = 10;
  e.values[i] = 1.0;
  const std::vector<double> row = op.apply(e.values);
  CHECK(row[i - 1] == Approx(-1.0 / dx).margin(1e-14));
  CHECK(row[i] == Approx(2.0 / dx + op.mass_weight(i)).margin(1e-14));
  CHECK(row[i + 1] == Approx(-1.0 / dx).margin(1e-14));
}

TEST_CASE("weighted norm of the constant equals the trapezoid quadrature", "[discretize]") {
  // n = 5 nodes on [-2, 2] with the default V and lambda = 10
  ProblemInstance inst = ProblemInstance::default_instance(10.0);
  inst.domain_halfwidth = 2.0;
  const auto mesh = Mesh::from_nodes({-2.0, -1.0, 0.0, 1.0, 2.0});
  const DiscreteOperator op = assemble(inst, mesh);
  DiscreteFunction one = DiscreteFunction::interpolate(mesh, [](double) { return 1.0; });

  // independent trapezoid oracle over the same nodes
  double trap = 0.0;
  for (std::size_t i = 0; i + 1 < mesh->size(); ++i) {
    const double fa = 1.0 + 10.0 * inst.potential.V(mesh->nodes[i]);
    const double fb = 1.0 + 10.0 * inst.potential.V(mesh->nodes[i + 1]);
    trap += 0.5 * (fa + fb) * mesh->spacing[i];
  }
  CHECK(trap == Approx(14.0).margin(1e-13));
  CHECK(op.norm_lambda_sq(one) == Approx(trap).margin(1e-13));
}

TEST_CASE("energy values on reference functions", "[discretize]") {
  const ProblemInstance inst = ProblemInstance::default_instance(100.0);
  const auto mesh = build_mesh(inst, 801);
  const DiscreteOperator op = assemble(inst, mesh);

  SECTION("zero function has zero energy") {
    CHECK(energy(op, inst, DiscreteFunction::zeros(mesh)) == 0.0);
  }
  SECTION("the obstacle envelope sits below half its squared norm") {
    DiscreteFunction phip = DiscreteFunction::interpolate(
        mesh, [&](double x) { return inst.obstacle.phi_plus(x); });
    const double e = energy(op, inst, phip);
    CHECK(e <= 0.5 * op.norm_lambda_sq(phip) + 1e-15);
    CHECK(e > 0.0);
  }
  SECTION("the obstacle ray is unbounded below") {
    DiscreteFunction phip = DiscreteFunction::interpolate(
        mesh, [&](double x) { return inst.obstacle.phi_plus(x); });
    DiscreteFunction ray = phip;
    for (auto& v : ray.values) v *= 50.0;
    CHECK(energy(op, inst, ray) < 0.0);
    CHECK(energy(op, inst, ray) < energy(op, inst, phip));
  }
}

TEST_CASE("gradient is the exact derivative of the energy", "[discretize]") {
  const ProblemInstance inst = ProblemInstance::default_instance(31.6);
  const auto mesh = build_mesh(inst, 301);
  const DiscreteOperator op = assemble(inst, mesh);
  const DiscreteFunction phi = obstacle_values(mesh, inst);

  SECTION("zero function has zero gradient") {
    const DiscreteFunction g = gradient(op, inst, DiscreteFunction::zeros(mesh));
    for (double v : g.values) CHECK(v == 0.0);
  }

  SECTION("finite differences along random directions") {
    for (int point = 0; point < 5; ++point) {
      const DiscreteFunction u = random_feasible(phi, 0.3 * (point + 1));
      const DiscreteFunction g = gradient(op, inst, u);
      for (int d = 0; d < 20; ++d) {
        DiscreteFunction dir = DiscreteFunction::zeros(mesh);
        for (auto& v : dir.values) v = test_util::uniform(-1.0, 1.0);
        double gd = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) gd += g.values[i] * dir.values[i];
        const double h = 1e-5;
        DiscreteFunction up = u, um = u;
        for (std::size_t i = 0; i < dir.size(); ++i) {
          up.values[i] += h * dir.values[i];
          um.values[i] -= h * dir.values[i];
        }
        const double fd = (energy(op, inst, up) - energy(op, inst, um)) / (2.0 * h);
        CHECK(std::abs(fd - gd) <= 1e-6 * std::max(1.0, std::abs(gd)));
      }
    }
  }
}

TEST_CASE("projection onto K is the nodewise max", "[discretize]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  const auto mesh = build_mesh(inst, 101);
  const DiscreteFunction phi = obstacle_values(mesh, inst);

  DiscreteFunction above = phi;
  for (auto& v : above.values) v += 1.0;
  CHECK(project_K(above, phi).values == above.values);  // already feasible

  DiscreteFunction sink = DiscreteFunction::interpolate(mesh, [](double) { return -1e30; });
  CHECK(project_K(sink, phi).values == phi.values);

  for (int trial = 0; trial < 50; ++trial) {
    DiscreteFunction u = DiscreteFunction::zeros(mesh);
    for (auto& v : u.values) v = test_util::uniform(-0.5, 0.5);
    const DiscreteFunction p = project_K(u, phi);
    const DiscreteFunction pp = project_K(p, phi);
    for (std::size_t i = 0; i < u.size(); ++i) {
      CHECK(p.values[i] == std::max(u.values[i], phi.values[i]));
      CHECK(pp.values[i] == p.values[i]);  // idempotent
    }
  }
}

TEST_CASE("the discrete lambda norm is positive definite", "[discretize][property]") {
  const ProblemInstance inst = ProblemInstance::default_instance(3.16);
  const auto mesh = build_mesh(inst, 101);
  const DiscreteOperator op = assemble(inst, mesh);
  for (int trial = 0; trial < 200; ++trial) {
    DiscreteFunction u = DiscreteFunction::zeros(mesh);
    double norm2 = 0.0;
    for (auto& v : u.values) {
      v = test_util::uniform(-1.0, 1.0);
      norm2 += v * v;
    }
    if (norm2 == 0.0) continue;
    CHECK(op.norm_lambda_sq(u) > 0.0);
  }
}

TEST_CASE("the lambda norm is monotone in lambda", "[discretize]") {
  ProblemInstance inst = ProblemInstance::default_instance();
  const auto mesh = build_mesh(inst, 201);

  // support meets {V > 0}: strictly increasing norms
  DiscreteFunction wide = DiscreteFunction::interpolate(
      mesh, [](double x) { return std::exp(-x * x / 8.0); });
  wide.values.front() = wide.values.back() = 0.0;
  double prev = -1.0;
  for (double lam : {1.0, 10.0, 100.0}) {
    inst.lambda = lam;
    const double n = assemble(inst, mesh).norm_lambda_sq(wide);
    CHECK(n > prev);
    prev = n;
  }

  // support inside O: the potential never sees the function
  DiscreteFunction inner = DiscreteFunction::interpolate(mesh, [&](double x) {
    return inst.obstacle.phi_plus(x);
  });
  inst.lambda = 1.0;
  const double n1 = assemble(inst, mesh).norm_lambda_sq(inner);
  inst.lambda = 1000.0;
  const double n2 = assemble(inst, mesh).norm_lambda_sq(inner);
  CHECK(n1 == Approx(n2).margin(1e-14));
}

TEST_CASE("energy converges at second order under refinement", "[discretize]") {
  ProblemInstance inst = ProblemInstance::default_instance(10.0);
  auto smooth = [](double x) { return std::exp(-x * x) * (8.0 - std::abs(x)) / 8.0; };
  double e[3];
  int idx = 0;
  for (int n : {129, 257, 513}) {
    const auto mesh = Mesh::from_nodes(linspace(-8.0, 8.0, n));
    const DiscreteOperator op = assemble(inst, mesh);
    DiscreteFunction u = DiscreteFunction::interpolate(mesh, smooth);
    u.values.front() = u.values.back() = 0.0;
    e[idx++] = energy(op, inst, u);
  }
  const double ratio = (e[0] - e[1]) / (e[1] - e[2]);
  CHECK(ratio == Approx(4.0).margin(0.6));
}

TEST_CASE("solution CSV has the declared schema", "[discretize]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  const auto mesh = build_mesh(inst, 33);
  const DiscreteFunction u = obstacle_values(mesh, inst);
  const std::string path =
      (std::filesystem::temp_directory_path() / "obstacle_test_u.csv").string();
  write_csv(u, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,value");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == u.size());
  std::filesystem::remove(path);
}

TEST_CASE("boundary layer mass vanishes for well-localized functions", "[discretize]") {
  ProblemInstance inst = ProblemInstance::default_instance();
  const auto mesh = Mesh::from_nodes(linspace(-8.0, 8.0, 129));
  const DiscreteOperator op = assemble(inst, mesh);

  DiscreteFunction inner = DiscreteFunction::interpolate(
      mesh, [&](double x) { return inst.obstacle.phi_plus(x); });
  CHECK(boundary_layer_mass(op, inner) == 0.0);

  DiscreteFunction one = DiscreteFunction::interpolate(mesh, [](double) { return 1.0; });
  CHECK(boundary_layer_mass(op, one) == Approx(8.0).margin(1e-12));
}
