// Solvers for the discrete penalized obstacle problem: preconditioned
// projected gradient (the minimizer of Theorem-3.1 type), a primal-dual
// active-set semismooth Newton method, the nodewise complementarity
// residual, a brute-force active-set enumeration oracle for tiny meshes,
// and the lambda-free limit problem on O.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "obstacle/discretize.hpp"
#include "obstacle/errors.hpp"
#include "obstacle/model.hpp"

namespace obstacle {

enum class SolveMethod { projected_gradient, semismooth_newton };

enum class SolveStatus { converged, max_iter_exceeded };

struct SolverOptions {
  SolveMethod method = SolveMethod::projected_gradient;
  double tol = 1e-10;       // stationarity tolerance in the lambda norm
  int max_iter = 200000;
  double armijo_c1 = 1e-4;  // sufficient decrease constant
  double backtrack = 0.5;   // step shrink factor
  double step0 = 1.0;       // initial trial step
  double gap_tol_rel = 1e-10;  // active/inactive split, relative to amplitude
};

struct SolveReport {
  DiscreteFunction solution;
  double energy = 0.0;
  double lambda_norm = 0.0;
  double comp_residual = 0.0;
  std::vector<std::size_t> active_set;
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;
  bool converged = false;
  double localization_max = 0.0;  // max of u over nodes off Omega
  double concentration = 0.0;     // lambda * sum w_i V_i u_i^2
  double linf_off_O = 0.0;        // max |u| over nodes off closure(O)
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double contact_gap(const ProblemInstance& inst, const SolverOptions& opts) {
  return opts.gap_tol_rel * std::max(1e-6, inst.obstacle.amplitude());
}

}  // namespace detail

/// Nodewise complementarity residual: with r = A u - diag(w) g(x, u), the
/// max of |r_i| over inactive interior nodes and of max(0, -r_i) over active
/// ones. Zero exactly at discrete VI solutions. Throws Infeasible when u
/// dips below the obstacle by more than roundoff.
inline double comp_residual(const ProblemInstance& inst, const DiscreteOperator& op,
                            const DiscreteFunction& u,
                            const SolverOptions& opts = SolverOptions{}) {
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  const double gap = detail::contact_gap(inst, opts);
  std::vector<double> r = op.apply(u.values);
  for (std::size_t i = 0; i < u.size(); ++i)
    r[i] -= op.weights()[i] * inst.g(op.mesh().nodes[i], u.values[i]);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    const double slack = u.values[i] - phi.values[i];
    if (slack < -1e-14) throw Infeasible("u < phi at node " + std::to_string(i));
    const double c = (slack > gap) ? std::abs(r[i]) : std::max(0.0, -r[i]);
    worst = std::max(worst, c);
  }
  return worst;
}

namespace detail {

/// Reduced-space Riesz direction (two-metric projection): the A_lambda
/// solve is restricted to the nodes estimated inactive, while binding nodes
/// (on the obstacle with a downhill push) take a diagonally scaled gradient
/// step. The full-space Riesz map would leak the contact multiplier into
/// free coordinates and stall the projected iteration on the envelope.
inline std::vector<double> two_metric_direction(const DiscreteOperator& op,
                                                const DiscreteFunction& phi,
                                                const DiscreteFunction& u,
                                                const DiscreteFunction& grad, double gap) {
  const std::size_t n = u.size();
  std::vector<char> free_mask(n, 1);
  free_mask[0] = 0;
  free_mask[n - 1] = 0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (u.values[i] - phi.values[i] <= gap && grad.values[i] > 0.0) free_mask[i] = 0;
  TridiagLDL fac(op.diag(), op.off(), free_mask);
  std::vector<double> rhs = grad.values;
  for (std::size_t i = 0; i < n; ++i)
    if (!free_mask[i]) rhs[i] = 0.0;
  std::vector<double> d = fac.solve(rhs);
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!free_mask[i]) d[i] = grad.values[i] / op.diag()[i];
  d[0] = d[n - 1] = 0.0;
  return d;
}

inline SolveReport finalize_report(const ProblemInstance& inst, const DiscreteOperator& op,
                                   DiscreteFunction u, int iterations, SolveStatus status,
                                   const SolverOptions& opts) {
  SolveReport rep;
  rep.energy = energy(op, inst, u);
  rep.lambda_norm = std::sqrt(op.norm_lambda_sq(u));
  rep.comp_residual = comp_residual(inst, op, u, opts);
  rep.iterations = iterations;
  rep.status = status;
  rep.converged = status == SolveStatus::converged;
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  const double gap = contact_gap(inst, opts);
  const auto& nodes = op.mesh().nodes;
  const double wl = inst.penalization.omega_left, wr = inst.penalization.omega_right;
  const double ol = inst.potential.o_left(), orr = inst.potential.o_right();
  double loc = -kInf, linf = 0.0;
  bool any_off_omega = false, any_off_o = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i > 0 && i + 1 < u.size() && u.values[i] - phi.values[i] <= gap)
      rep.active_set.push_back(i);
    if (!(nodes[i] > wl && nodes[i] < wr)) {
      loc = std::max(loc, u.values[i]);
      any_off_omega = true;
    }
    if (nodes[i] < ol || nodes[i] > orr) {
      linf = std::max(linf, std::abs(u.values[i]));
      any_off_o = true;
    }
  }
  rep.localization_max = any_off_omega ? loc : 0.0;
  rep.linf_off_O = any_off_o ? linf : 0.0;
  rep.concentration = op.concentration(u.values);
  rep.solution = std::move(u);
  return rep;
}

/// Shared projected-gradient loop with the A_lambda Riesz preconditioner and
/// Armijo backtracking; falls back to a diagonally preconditioned step when
/// the Riesz direction yields no decrease. Returns the last stationarity
/// measure; `u` is updated in place and stays feasible throughout.
inline double projected_gradient_loop(const ProblemInstance& inst,
                                      const DiscreteOperator& op,
                                      const DiscreteFunction& phi, DiscreteFunction& u,
                                      const SolverOptions& opts, int max_iter,
                                      int& iters_used) {
  double stat = kInf;
  double prev_stat = kInf;
  const std::size_t n = u.size();
  const double gap = contact_gap(inst, opts);
  DiscreteFunction cand = u;
  for (iters_used = 0; iters_used < max_iter; ++iters_used) {
    const DiscreteFunction grad = gradient(op, inst, u);
    const std::vector<double> d = two_metric_direction(op, phi, u, grad, gap);
    // stationarity: distance to the unit-step projected point
    double s2 = 0.0;
    {
      for (std::size_t i = 0; i < n; ++i)
        cand.values[i] = std::max(u.values[i] - d[i], phi.values[i]);
      cand.values.front() = cand.values.back() = 0.0;
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = u.values[i] - cand.values[i];
      s2 = op.norm_lambda_sq(diff);
    }
    stat = std::sqrt(s2);
    if (stat <= opts.tol) return stat;

    // asymptotic regime: energy differences drop below roundoff before the
    // residual reaches tol, so take the contractive fixed-point step as long
    // as the residual keeps shrinking
    const double unorm = std::sqrt(op.norm_lambda_sq(u));
    if (stat <= 1e-6 * std::max(1.0, unorm) && stat <= prev_stat * (1.0 + 1e-3)) {
      std::swap(u.values, cand.values);
      prev_stat = stat;
      continue;
    }
    prev_stat = stat;

    const double e0 = energy(op, inst, u);
    bool accepted = false;
    for (int pass = 0; pass < 2 && !accepted; ++pass) {
      double tau = opts.step0;
      for (int bt = 0; bt < 60; ++bt) {
        for (std::size_t i = 0; i < n; ++i) {
          const double step = (pass == 0) ? tau * d[i] : tau * grad.values[i] / op.diag()[i];
          cand.values[i] = std::max(u.values[i] - step, phi.values[i]);
        }
        cand.values.front() = cand.values.back() = 0.0;
        const double ec = energy(op, inst, cand);
        double gdot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          gdot += grad.values[i] * (cand.values[i] - u.values[i]);
        if (ec < e0 && ec <= e0 + opts.armijo_c1 * std::min(0.0, gdot)) {
          accepted = true;
          break;
        }
        tau *= opts.backtrack;
      }
    }
    if (!accepted) return stat;  // energy flat to roundoff; caller decides
    std::swap(u.values, cand.values);
  }
  return stat;
}

}  // namespace detail

/// Minimization route to the first solution: projected gradient descent in
/// the E_lambda geometry started from the obstacle envelope max(phi, 0).
/// Energy is nonincreasing along the iterates and every iterate is feasible.
/// On success the a-priori bound ||u||^2 <= 4 ||phi+||^2 (+ slack) holds and
/// the report carries the localization and concentration diagnostics.
/// Throws BallViolation when the converged iterate has ||u||_lambda >= r.
inline SolveReport solve_min(const ProblemInstance& inst, const DiscreteOperator& op,
                             const SolverOptions& opts = SolverOptions{}) {
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  DiscreteFunction u = project_K(DiscreteFunction::zeros(op.mesh_ptr()), phi);
  u.values.front() = u.values.back() = 0.0;
  int iters = 0;
  const double stat =
      detail::projected_gradient_loop(inst, op, phi, u, opts, opts.max_iter, iters);
  const SolveStatus status =
      stat <= opts.tol ? SolveStatus::converged : SolveStatus::max_iter_exceeded;
  SolveReport rep = detail::finalize_report(inst, op, std::move(u), iters, status, opts);
  if (rep.converged) {
    if (rep.lambda_norm >= inst.ball_radius)
      throw BallViolation("||u||_lambda = " + std::to_string(rep.lambda_norm) +
                          " >= r = " + std::to_string(inst.ball_radius));
    double min_u = 0.0;
    for (double v : rep.solution.values) min_u = std::min(min_u, v);
    if (min_u < -std::max(1e-10, 10.0 * opts.tol))
      throw Error("minimizer lost nonnegativity: min u = " + std::to_string(min_u));
  }
  return rep;
}

namespace detail {

/// Damped Newton on the reduced nonlinear system with a pinned-node mask:
/// rows in `pinned` enforce u_i = target_i, free rows solve
/// (A u)_i - w_i g(x_i, u_i) = 0. Returns the final free-residual max norm.
/// Levenberg damping is added when the tridiagonal factorization breaks.
inline double pinned_newton(const ProblemInstance& inst, const DiscreteOperator& op,
                            const std::vector<char>& pinned,
                            const std::vector<double>& target, DiscreteFunction& u,
                            int max_iter = 80, double tol = 1e-13) {
  const std::size_t n = u.size();
  std::vector<char> free_mask(n);
  for (std::size_t i = 0; i < n; ++i) free_mask[i] = !pinned[i];
  const auto& nodes = op.mesh().nodes;

  auto residual = [&](const DiscreteFunction& v, std::vector<double>& r) {
    r = op.apply(v.values);
    for (std::size_t i = 0; i < n; ++i)
      r[i] -= op.weights()[i] * inst.g(nodes[i], v.values[i]);
  };
  // candidates with runaway values are rejected outright; the nonlinearity
  // overflows long before doubles do
  const double value_cap = 1e8;
  auto merit = [&](const DiscreteFunction& v) {
    for (double x : v.values)
      if (!(std::abs(x) <= value_cap)) return kInf;
    std::vector<double> r;
    residual(v, r);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = free_mask[i] ? r[i] : (v.values[i] - target[i]);
      m += ri * ri;
    }
    return std::sqrt(m);
  };

  std::vector<double> r, rhs(n), jdiag(n);
  DiscreteFunction cand = u;
  double m0 = merit(u);
  for (int it = 0; it < max_iter; ++it) {
    if (m0 <= tol) break;
    residual(u, r);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = free_mask[i] ? -r[i] : (target[i] - u.values[i]);
      jdiag[i] = op.diag()[i] - op.weights()[i] * inst.dg(nodes[i], u.values[i]);
    }
    std::vector<double> delta;
    double mu = 0.0;
    for (int reg = 0; reg < 40; ++reg) {
      try {
        std::vector<double> jd = jdiag;
        if (mu > 0.0)
          for (std::size_t i = 0; i < n; ++i) jd[i] += mu * op.weights()[i];
        TridiagLDL fac(jd, op.off(), free_mask, 1e-300);
        delta = fac.solve(rhs);
        break;
      } catch (const JacobianSingular&) {
        mu = (mu == 0.0) ? 1e-8 : mu * 100.0;
        if (reg == 39) throw;
      }
    }
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 50; ++bt) {
      for (std::size_t i = 0; i < n; ++i) cand.values[i] = u.values[i] + t * delta[i];
      const double mc = merit(cand);
      if (mc <= (1.0 - 1e-4 * t) * m0) {
        std::swap(u.values, cand.values);
        m0 = mc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // no descent in the merit; caller falls back
  }
  return m0;
}

}  // namespace detail

/// Primal-dual active-set semismooth Newton iteration on the nonlinear
/// complementarity system. Starts from a feasible u0; at active nodes the
/// iterate sits on the obstacle with nonnegative multiplier, at inactive
/// nodes the nonlinear residual is solved by damped Newton. Falls back to
/// projected-gradient sweeps when Newton stalls. Every outer iterate is
/// feasible.
inline SolveReport semismooth_newton(const ProblemInstance& inst, const DiscreteOperator& op,
                                     const DiscreteFunction& u0,
                                     const SolverOptions& opts = SolverOptions{}) {
  const std::size_t n = op.size();
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  DiscreteFunction u = project_K(u0, phi);
  u.values.front() = u.values.back() = 0.0;
  const double gap = detail::contact_gap(inst, opts);

  std::vector<char> pinned(n, 0);
  std::vector<double> target(n, 0.0);
  std::vector<char> active(n, 0), prev_active(n, 0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    active[i] = (u.values[i] - phi.values[i] <= gap);

  const int max_outer = std::max(20, std::min(200, opts.max_iter));
  int outer = 0;
  bool ok = false;
  for (; outer < max_outer; ++outer) {
    for (std::size_t i = 0; i < n; ++i) {
      pinned[i] = (i == 0 || i + 1 == n) ? 1 : active[i];
      target[i] = (i == 0 || i + 1 == n) ? 0.0 : phi.values[i];
    }
    const double rm = detail::pinned_newton(inst, op, pinned, target, u);
    // multiplier sign and feasibility drive the active-set update
    std::vector<double> r = op.apply(u.values);
    for (std::size_t i = 0; i < n; ++i)
      r[i] -= op.weights()[i] * inst.g(op.mesh().nodes[i], u.values[i]);
    prev_active = active;
    bool newton_stuck = rm > 1e-9 * std::max(1.0, std::abs(r[n / 2]));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double slack = u.values[i] - phi.values[i];
      const double mult = r[i] / op.weights()[i];
      active[i] = (mult - slack > 0.0) || (slack < -gap);
    }
    // keep the outer iterate feasible
    for (std::size_t i = 0; i < n; ++i)
      u.values[i] = std::max(u.values[i], phi.values[i]);
    u.values.front() = u.values.back() = 0.0;
    if (newton_stuck && rm > 1e-9) {
      // NoDescent fallback: a few projected-gradient sweeps re-seed Newton
      SolverOptions pg = opts;
      pg.tol = std::max(opts.tol, rm * 1e-3);
      int pg_iters = 0;
      detail::projected_gradient_loop(inst, op, phi, u, pg, 50, pg_iters);
      for (std::size_t i = 1; i + 1 < n; ++i)
        active[i] = (u.values[i] - phi.values[i] <= gap);
      continue;
    }
    if (active == prev_active && rm <= 1e-11) {
      ok = true;
      ++outer;
      break;
    }
  }
  SolveStatus status = SolveStatus::max_iter_exceeded;
  if (ok) {
    SolverOptions check = opts;
    if (comp_residual(inst, op, u, check) <= std::max(opts.tol, 1e-10))
      status = SolveStatus::converged;
  }
  return detail::finalize_report(inst, op, std::move(u), outer, status, opts);
}

/// Relative lumped-L2 distance used by the distinctness criterion.
inline double relative_l2_distance(const DiscreteOperator& op, const DiscreteFunction& u,
                                   const DiscreteFunction& w) {
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u.values[i] - w.values[i];
  const double nd = std::sqrt(op.l2_norm_sq(diff));
  const double nu = std::sqrt(op.l2_norm_sq(u.values));
  const double nw = std::sqrt(op.l2_norm_sq(w.values));
  return nd / std::max(1e-300, std::max(nu, nw));
}

/// Two solutions are reported as distinct when they are separated in both
/// the relative L2 distance and the energy level.
inline bool distinct_solutions(const DiscreteOperator& op, const DiscreteFunction& u,
                               double energy_u, const DiscreteFunction& w, double energy_w) {
  return relative_l2_distance(op, u, w) > 1e-3 && std::abs(energy_u - energy_w) > 1e-8;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace detail {

/// Dense Gaussian elimination with partial pivoting; deliberately separate
/// from the tridiagonal path so the oracle does not share solver machinery.
inline bool dense_solve(std::vector<std::vector<double>> M, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    if (std::abs(M[piv][col]) < 1e-300) return false;
    std::swap(M[piv], M[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double fac = M[r][col] / M[col][col];
      if (fac == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) M[r][c] -= fac * M[col][c];
      b[r] -= fac * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= M[i][c] * b[c];
    b[i] = s / M[i][i];
  }
  return true;
}

}  // namespace detail

/// Enumerates every candidate active set over the nodes where the obstacle
/// is positive, solves each reduced nonlinear system by dense Newton from a
/// deterministic family of starts, keeps the feasible KKT points and returns
/// them sorted by energy. Only meaningful on tiny meshes (n <= 14); this is
/// the independent multiplicity witness.
inline std::vector<SolveReport> oracle_enumerate(const ProblemInstance& inst,
                                                 const DiscreteOperator& op,
                                                 const SolverOptions& opts = SolverOptions{}) {
  const std::size_t n = op.size();
  if (n > 14) throw ConfigError("oracle_enumerate is restricted to meshes with n <= 14");
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  const auto& nodes = op.mesh().nodes;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (phi.values[i] > 0.0) candidates.push_back(i);

  // deterministic start family: envelope, scaled obstacle rays, well modes
  std::vector<DiscreteFunction> starts;
  starts.push_back(project_K(DiscreteFunction::zeros(op.mesh_ptr()), phi));
  DiscreteFunction phip = DiscreteFunction::interpolate(
      op.mesh_ptr(), [&](double x) { return inst.obstacle.phi_plus(x); });
  for (double t : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    DiscreteFunction s = phip;
    for (auto& v : s.values) v *= t;
    starts.push_back(s);
  }
  const double ol = inst.potential.o_left(), orr = inst.potential.o_right();
  const double oc = 0.5 * (ol + orr), ow = 0.5 * (orr - ol);
  for (double amp : {0.5, 1.0, 2.0, 4.0}) {
    starts.push_back(DiscreteFunction::interpolate(op.mesh_ptr(), [&](double x) {
      const double s = (x - oc) / ow;
      return std::abs(s) < 1.0 ? amp * std::cos(1.5707963267948966 * s) : 0.0;
    }));
  }

  std::vector<SolveReport> found;
  const std::size_t m = candidates.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<char> pin(n, 0);
    pin.front() = pin.back() = 1;
    for (std::size_t b = 0; b < m; ++b)
      if (mask & (std::size_t{1} << b)) pin[candidates[b]] = 1;
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (!pin[i]) free_idx.push_back(i);

    for (const DiscreteFunction& s0 : starts) {
      DiscreteFunction u = s0;
      u.values.front() = u.values.back() = 0.0;
      for (std::size_t b = 0; b < m; ++b)
        if (mask & (std::size_t{1} << b))
          u.values[candidates[b]] = phi.values[candidates[b]];

      bool converged = false;
      for (int it = 0; it < 120; ++it) {
        // residual and Jacobian on the free block
        std::vector<double> r(free_idx.size());
        std::vector<std::vector<double>> J(free_idx.size(),
                                           std::vector<double>(free_idx.size(), 0.0));
        double rmax = 0.0;
        for (std::size_t a = 0; a < free_idx.size(); ++a) {
          const std::size_t i = free_idx[a];
          double ri = op.diag()[i] * u.values[i];
          if (i > 0) ri += op.off()[i - 1] * u.values[i - 1];
          if (i + 1 < n) ri += op.off()[i] * u.values[i + 1];
          ri -= op.weights()[i] * inst.g(nodes[i], u.values[i]);
          r[a] = ri;
          rmax = std::max(rmax, std::abs(ri));
          J[a][a] = op.diag()[i] - op.weights()[i] * inst.dg(nodes[i], u.values[i]);
          for (std::size_t b2 = 0; b2 < free_idx.size(); ++b2) {
            const std::size_t j = free_idx[b2];
            if (j + 1 == i) J[a][b2] = op.off()[j];
            if (j == i + 1) J[a][b2] = op.off()[i];
          }
        }
        if (rmax < 1e-13) {
          converged = true;
          break;
        }
        std::vector<double> step = r;
        if (!detail::dense_solve(J, step)) break;
        double t = 1.0;
        // plain halving on the residual norm
        auto rnorm = [&](double tt) {
          double worst = 0.0;
          DiscreteFunction v = u;
          for (std::size_t a = 0; a < free_idx.size(); ++a)
            v.values[free_idx[a]] -= tt * step[a];
          for (std::size_t a = 0; a < free_idx.size(); ++a) {
            const std::size_t i = free_idx[a];
            double ri = op.diag()[i] * v.values[i];
            if (i > 0) ri += op.off()[i - 1] * v.values[i - 1];
            if (i + 1 < n) ri += op.off()[i] * v.values[i + 1];
            ri -= op.weights()[i] * inst.g(nodes[i], v.values[i]);
            worst = std::max(worst, std::abs(ri));
          }
          return worst;
        };
        while (t > 1e-10 && rnorm(t) >= rmax) t *= 0.5;
        if (t <= 1e-10) break;
        for (std::size_t a = 0; a < free_idx.size(); ++a)
          u.values[free_idx[a]] -= t * step[a];
      }
      if (!converged) continue;

      // KKT screening: feasible everywhere, multiplier >= 0 on the actives
      bool feasible = true;
      for (std::size_t i = 0; i < n; ++i)
        if (u.values[i] < phi.values[i] - 1e-12 && !(i == 0 || i + 1 == n)) feasible = false;
      if (!feasible) continue;
      std::vector<double> rfull = op.apply(u.values);
      for (std::size_t i = 0; i < n; ++i)
        rfull[i] -= op.weights()[i] * inst.g(nodes[i], u.values[i]);
      bool kkt = true;
      for (std::size_t b = 0; b < m; ++b)
        if ((mask & (std::size_t{1} << b)) && rfull[candidates[b]] < -1e-11) kkt = false;
      if (!kkt) continue;
      for (std::size_t i = 0; i < n; ++i)
        u.values[i] = std::max(u.values[i], phi.values[i]);
      u.values.front() = u.values.back() = 0.0;

      bool duplicate = false;
      for (const SolveReport& f : found) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          d = std::max(d, std::abs(f.solution.values[i] - u.values[i]));
        if (d <= 1e-7) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      SolveReport rep = detail::finalize_report(inst, op, u, 0, SolveStatus::converged, opts);
      if (rep.comp_residual <= 1e-10) found.push_back(std::move(rep));
    }
  }
  std::sort(found.begin(), found.end(),
            [](const SolveReport& a, const SolveReport& b) { return a.energy < b.energy; });
  return found;
}

// ---------------------------------------------------------------------------
// Limit problem on O

/// The instance of the lambda-free limit problem on O: plain nonlinearity f
/// (penalization disabled) and no potential term.
inline ProblemInstance limit_instance(const ProblemInstance& inst) {
  ProblemInstance lim = inst;
  lim.lambda = 0.0;
  lim.penalization =
      PenalizedNonlinearity::none(inst.potential.o_left(), inst.potential.o_right());
  return lim;
}

struct LimitProblem {
  ProblemInstance instance;                  // lambda-free, g == f
  std::shared_ptr<const Mesh> mesh;          // nodes of the full mesh inside closure(O)
  std::size_t offset = 0;                    // index of o_left in the full mesh
  SolveReport report;                        // solution psi on the submesh
};

/// Solves the lambda-free obstacle problem on O with Dirichlet zero at the
/// ends of O, on the restriction of the given mesh (whose nodes contain the
/// endpoints of O). The solution is the lambda -> infinity reference.
inline LimitProblem solve_limit_problem(const ProblemInstance& inst,
                                        const DiscreteOperator& op,
                                        const SolverOptions& opts = SolverOptions{}) {
  LimitProblem lp;
  lp.instance = limit_instance(inst);
  const std::size_t il = op.mesh().index_of(inst.potential.o_left());
  const std::size_t ir = op.mesh().index_of(inst.potential.o_right());
  if (ir - il < 2) throw ConfigError("mesh too coarse to restrict to O");
  lp.offset = il;
  lp.mesh = Mesh::from_nodes(std::vector<double>(op.mesh().nodes.begin() + il,
                                                 op.mesh().nodes.begin() + ir + 1));
  DiscreteOperator sub = assemble(lp.instance, lp.mesh);
  SolveReport pg = solve_min(lp.instance, sub, opts);
  SolveReport polished = semismooth_newton(lp.instance, sub, pg.solution, opts);
  lp.report = polished.converged ? std::move(polished) : std::move(pg);
  return lp;
}

/// Zero-extension of a limit solution onto the full mesh.
inline DiscreteFunction extend_by_zero(const LimitProblem& lp,
                                       std::shared_ptr<const Mesh> full_mesh) {
  DiscreteFunction out = DiscreteFunction::zeros(std::move(full_mesh));
  for (std::size_t i = 0; i < lp.report.solution.size(); ++i)
    out.values[lp.offset + i] = lp.report.solution.values[i];
  return out;
}

/// Plain H^1 distance between a full-mesh function and the zero-extended
/// limit solution.
inline double h1_distance_to_limit(const DiscreteOperator& op, const DiscreteFunction& u,
                                   const LimitProblem& lp) {
  DiscreteFunction ext = extend_by_zero(lp, op.mesh_ptr());
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u.values[i] - ext.values[i];
  return std::sqrt(op.h1_norm_sq(diff));
}

}  // namespace obstacle
