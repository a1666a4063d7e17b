#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "obstacle/model.hpp"
#include "test_util.hpp"

using namespace obstacle;
using Catch::Approx;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

NonlinearitySpec cubic_table(int samples = 401, double tmax = 2.0, double theta = 4.0) {
  std::vector<double> t = linspace(0.0, tmax, samples), f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = t[i] * t[i] * t[i];
  return NonlinearitySpec::tabulated(t, f, theta);
}

}  // namespace

TEST_CASE("threshold a for the power family has the analytic value", "[model]") {
  // f(t) = t^3, k = 4: f(a)/a = a^2 = 1/4, so a = 1/2
  const double a1 = solve_threshold_a(NonlinearitySpec::power(3.0), 4.0);
  CHECK(std::abs(a1 - 0.5) < 1e-12);
  CHECK(std::abs(a1 * a1 - 0.25) < 1e-12);

  // f(t) = t^2, k = 8: f(a)/a = a = 1/8
  const double a2 = solve_threshold_a(NonlinearitySpec::power(2.0), 8.0);
  CHECK(std::abs(a2 - 0.125) < 1e-12);
}

TEST_CASE("threshold a from a tabulated cubic matches the analytic root", "[model]") {
  const NonlinearitySpec f = cubic_table();
  const double a = solve_threshold_a(f, 4.0);
  CHECK(a == Approx(0.5).margin(1e-6));
  CHECK(std::abs(f.f(a) / a - 0.25) < 1e-12);
}

TEST_CASE("threshold a is monotone decreasing in k", "[model]") {
  const NonlinearitySpec f = NonlinearitySpec::power(3.0);
  double prev = kInf;
  for (double k : {2.5, 3.0, 4.0, 6.0, 10.0, 20.0}) {
    const double a = solve_threshold_a(f, k);
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("threshold search reports a missing bracket", "[model]") {
  // f so shallow that f(t)/t stays far below 1/k on the whole table
  std::vector<double> t = linspace(0.0, 2.0, 101), f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = 1e-6 * t[i] * t[i] * t[i];
  const NonlinearitySpec weak = NonlinearitySpec::tabulated(t, f, 4.0);
  CHECK_THROWS_AS(solve_threshold_a(weak, 4.0), NoBracket);
}

TEST_CASE("h evaluates both branches and is continuous at a", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  REQUIRE(inst.penalization.a == Approx(0.5).margin(1e-12));
  CHECK(inst.h(0.25) == Approx(0.015625).margin(1e-15));  // 0.25^3
  CHECK(inst.h(1.0) == Approx(0.25).margin(1e-15));       // t/k = 1/4
  // both branches agree at the gluing point
  CHECK(inst.nonlinearity.f(0.5) == Approx(0.125).margin(1e-12));
  CHECK(0.5 / inst.penalization.k == Approx(0.125).margin(1e-15));
  CHECK(inst.h(0.5) == Approx(0.125).margin(1e-12));
}

TEST_CASE("g and G: branches, closed form and quadrature oracle", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance();

  SECTION("inside Omega g is f") {
    for (double t : {-1.0, 0.1, 0.5, 2.0, 10.0})
      CHECK(inst.g(0.7, t) == inst.nonlinearity.f(t));
  }
  SECTION("nonpositive arguments give zero") {
    for (double x : {0.0, 2.0, 7.5}) {
      CHECK(inst.g(x, -1.0) == 0.0);
      CHECK(inst.G(x, -1.0) == 0.0);
    }
  }
  SECTION("frozen off-Omega value at t above the threshold") {
    // G = F(1/2) + (1 - 1/4)/8 = 0.015625 + 0.09375
    CHECK(inst.g(2.0, 1.0) == Approx(0.25).margin(1e-15));
    CHECK(inst.G(2.0, 1.0) == Approx(0.109375).margin(1e-14));
  }
  SECTION("closed-form G agrees with numeric quadrature of g") {
    for (double x : {0.3, 1.7, 5.0}) {
      for (double t : {0.3, 0.5, 1.0, 3.0}) {
        const double quad =
            test_util::simpson([&](double s) { return inst.g(x, s); }, 0.0, t, 4096);
        CHECK(inst.G(x, t) == Approx(quad).margin(1e-10));
      }
    }
  }
}

TEST_CASE("branch coherence: g equals f on Omega or below the threshold", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  for (int trial = 0; trial < 500; ++trial) {
    const double x = test_util::uniform(-8.0, 8.0);
    const double t = test_util::uniform(-3.0, 3.0);
    if (inst.in_omega(x) || t <= inst.penalization.a)
      CHECK(inst.g(x, t) == inst.nonlinearity.f(t));
  }
}

TEST_CASE("growth chain holds off Omega with tiny margin", "[model][property]") {
  ProblemInstance inst = ProblemInstance::default_instance(10.0);
  const double k = inst.penalization.k;
  for (int trial = 0; trial < 2000; ++trial) {
    double x = test_util::uniform(1.5, 8.0);
    if (trial % 2) x = -x;
    const double t = test_util::uniform(-6.0, 6.0);
    const double gt = inst.g(x, t) * t;
    const double lhs = 2.0 * inst.G(x, t);
    const double rhs = (1.0 + inst.lambda * inst.potential.V(x)) * t * t / k;
    const double scale = std::max(1.0, std::abs(gt));
    CHECK((gt - lhs) / scale >= -1e-12);
    CHECK((rhs - gt) / std::max(1.0, rhs) >= -1e-12);
  }
}

TEST_CASE("G is C1 with derivative g", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = test_util::uniform(-6.0, 6.0);
    const double t = test_util::uniform(-2.0, 2.0);
    const double h = 1e-6 * std::max(1.0, std::abs(t));
    const double fd = (inst.G(x, t + h) - inst.G(x, t - h)) / (2.0 * h);
    const double g = inst.g(x, t);
    CHECK(std::abs(fd - g) <= 1e-8 * std::max(1.0, std::abs(g)));
    ++checked;
  }
  REQUIRE(checked == 100);
}

TEST_CASE("hypothesis suite passes on the default instance", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance(100.0);
  const ValidationReport rep = validate_hypotheses(inst, 10000);
  for (const auto& c : rep.checks) {
    INFO(c.name << " margin " << c.margin);
    CHECK(c.pass);
    CHECK(c.margin >= -1e-12);
  }
  REQUIRE(rep.all_pass());
  CHECK_NOTHROW(require_valid(rep));
}

TEST_CASE("superquadratic growth holds with equality for the power family", "[model]") {
  // theta F(t) = t^4 = f(t) t exactly: margin essentially zero
  const ProblemInstance inst = ProblemInstance::default_instance();
  const ValidationReport rep = validate_hypotheses(inst, 4000);
  for (const auto& c : rep.checks)
    if (c.name == "f2_superquadratic") {
      CHECK(c.margin >= -1e-12);
      CHECK(c.margin <= 1e-10);
    }
}

TEST_CASE("an inflated theta breaks the superquadratic bound for every t", "[model]") {
  // cubic data but theta = 4.5: theta F = 1.125 t^4 > t^4 = f t
  ProblemInstance inst = ProblemInstance::default_instance();
  inst.nonlinearity = cubic_table(801, 4.0, 4.5);
  inst.penalization = make_penalization(inst.nonlinearity, 4.0, -1.5, 1.5);
  const ValidationReport rep = validate_hypotheses(inst, 4000);
  const ValidationCheck* f2 = nullptr;
  for (const auto& c : rep.checks)
    if (c.name == "f2_superquadratic") f2 = &c;
  REQUIRE(f2 != nullptr);
  CHECK_FALSE(f2->pass);
  CHECK(f2->margin < 0.0);
  CHECK(f2->witness_t > 0.0);
  CHECK_THROWS_AS(require_valid(rep), HypothesisViolated);
}

TEST_CASE("a nonmonotone table fails the monotonicity check", "[model]") {
  std::vector<double> t = linspace(0.0, 2.0, 60), f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    f[i] = t[i] * t[i] * t[i] * (1.0 + 0.4 * std::sin(9.0 * t[i]));
  ProblemInstance inst = ProblemInstance::default_instance();
  inst.nonlinearity = NonlinearitySpec::tabulated(t, f, 4.0);
  inst.penalization.a = 0.5;  // keep a finite threshold without re-solving
  const ValidationReport rep = validate_hypotheses(inst, 4000);
  bool mono_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "f_monotone" && !c.pass) mono_failed = true;
  CHECK(mono_failed);
}

TEST_CASE("growth chain at the breakpoint x = L, t = a", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance(100.0);
  const double L = inst.domain_halfwidth, a = inst.penalization.a,
               k = inst.penalization.k;
  const double twoG = 2.0 * inst.G(L, a);
  const double gt = inst.g(L, a) * a;
  CHECK(twoG <= gt + 1e-15);
  CHECK(gt == Approx(a * a / k).margin(1e-15));
  CHECK(gt <= (1.0 + inst.lambda * inst.potential.V(L)) * a * a / k + 1e-15);
}

TEST_CASE("obstacle norm closed form matches quadrature", "[model]") {
  const ObstacleSpec bump = ObstacleSpec::bump(0.0, 0.5, 0.18);
  const double closed = bump.h1_norm_sq_plus();
  const double A = 0.18, w = 0.5;
  CHECK(closed == Approx(A * A * (16.0 * w / 15.0 + 8.0 / (3.0 * w))).margin(1e-15));
  const double quad = test_util::simpson(
      [&](double x) {
        const double s = x / w;
        const double phi = A * (1.0 - s * s);
        const double dphi = -2.0 * A * s / w;
        return phi * phi + dphi * dphi;
      },
      -w, w, 8192);
  CHECK(closed == Approx(quad).margin(1e-10));

  // piecewise-linear hat: exact energy of max(phi, 0)
  const ObstacleSpec hat = ObstacleSpec::tabulated({-1.0, 0.0, 1.0}, {-0.3, 0.5, -0.3});
  // positive part is a hat of height 0.5 over [-0.625, 0.625]
  const double slope = 0.8, ell = 0.625;
  CHECK(hat.h1_norm_sq_plus() ==
        Approx(2.0 * (slope * slope * ell + ell * 0.25 / 3.0)).margin(1e-12));
  CHECK(hat.support_left() == Approx(-0.625));
  CHECK(hat.support_right() == Approx(0.625));
}

TEST_CASE("geometry validators accept the default and reject bad sets", "[model]") {
  const ProblemInstance good = ProblemInstance::default_instance();
  CHECK(validate_geometry(good).all_pass());

  SECTION("Omega equal to O is rejected") {
    ProblemInstance inst = good;
    inst.penalization.omega_left = -1.0;
    inst.penalization.omega_right = 1.0;
    const ValidationReport rep = validate_geometry(inst);
    bool failed = false;
    for (const auto& c : rep.checks)
      if (c.name == "O_in_Omega" && !c.pass) failed = true;
    CHECK(failed);
  }
  SECTION("a bump wider than O is rejected with a witness") {
    ProblemInstance inst = good;
    inst.obstacle = ObstacleSpec::bump(0.0, 1.2, 0.05);
    const ValidationReport rep = validate_geometry(inst);
    const ValidationCheck* c = nullptr;
    for (const auto& ck : rep.checks)
      if (ck.name == "support_in_O") c = &ck;
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
    CHECK(std::abs(c->witness_x) == Approx(1.2));
  }
  SECTION("smallness is enforced unless relaxed") {
    ProblemInstance inst = good;
    inst.obstacle = ObstacleSpec::bump(0.0, 0.5, 0.3);  // 4||phi+||^2 > 1
    ValidationReport rep = validate_geometry(inst);
    bool failed = false;
    for (const auto& c : rep.checks)
      if (c.name == "smallness_4phi2_lt_r2" && !c.pass) failed = true;
    CHECK(failed);
    inst.relax_smallness = true;
    CHECK(validate_geometry(inst).all_pass());
  }
}

TEST_CASE("smallness margin matches the exact norm", "[model]") {
  const ProblemInstance inst = ProblemInstance::default_instance();
  const double r2 = inst.ball_radius * inst.ball_radius;
  const double expect = (r2 - 4.0 * inst.obstacle.h1_norm_sq_plus()) / r2;
  const ValidationReport rep = validate_geometry(inst);
  for (const auto& c : rep.checks)
    if (c.name == "smallness_4phi2_lt_r2") CHECK(c.margin == Approx(expect).margin(1e-15));
}
