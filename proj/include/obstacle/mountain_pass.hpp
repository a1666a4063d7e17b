// Constrained numerical mountain pass: a discrete path in K from the
// minimizer to a high-energy endpoint on the obstacle ray is deformed by
// preconditioned projected descent of its peak until the peak is a
// stationary point of the variational inequality; a semismooth Newton
// polish sharpens the saddle.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "obstacle/discretize.hpp"
#include "obstacle/errors.hpp"
#include "obstacle/model.hpp"
#include "obstacle/vi_solver.hpp"

namespace obstacle {

struct MountainPassOptions {
  int path_points = 40;       // P: the path has P+1 nodes
  double tol = 1e-10;         // residual tolerance of the polished saddle
  double path_tol = 1e-6;     // peak stationarity that triggers the polish
  int max_sweeps = 50000;
  int respread_every = 10;    // arclength reparametrization cadence
  int polish_every = 50;      // Newton polish attempt cadence
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int sigma_grid = 1001;      // t-grid for the Sigma bound
  bool record_trace = false;
  SolverOptions polish;       // options for the Newton polish
};

struct MountainPath {
  std::vector<DiscreteFunction> points;  // points[0] = u_lambda, points[P] = e
  std::vector<double> energies;
  std::size_t peak_index = 0;

  std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }
};

struct TraceRow {
  int sweep;
  double peak_energy;
  double residual;
};

struct MountainPassReport {
  DiscreteFunction solution;  // w_lambda
  double c_lambda = 0.0;
  double rho = 0.0;           // r^2 / 8
  double sigma_bound = 0.0;   // max_t J(t t* phi+)
  int iterations = 0;         // sweeps performed
  double comp_residual = 0.0;
  double lambda_norm = 0.0;
  double energy_u0 = 0.0;     // energy of the fixed low endpoint
  SolveStatus status = SolveStatus::converged;
  bool converged = false;
  double localization_max = 0.0;
  double concentration = 0.0;
  double linf_off_O = 0.0;
  std::vector<std::size_t> active_set;
  std::vector<TraceRow> trace;
};

/// Endpoint of the mountain-pass path: e = t* phi+ with t* the smallest
/// doubling value such that the energy drops below energy_upper - 1 and the
/// lambda norm leaves the ball. For t* >= 1 the ray point dominates phi, so
/// e is feasible. energy_upper defaults to 0, a lower bound for the energy
/// of any minimizer in the ball.
inline DiscreteFunction build_endpoint(const ProblemInstance& inst,
                                       const DiscreteOperator& op,
                                       double energy_upper = 0.0) {
  DiscreteFunction phip = DiscreteFunction::interpolate(
      op.mesh_ptr(), [&](double x) { return inst.obstacle.phi_plus(x); });
  DiscreteFunction e = phip;
  for (double t = 2.0; t <= double(1u << 30); t *= 2.0) {
    for (std::size_t i = 0; i < e.size(); ++i) e.values[i] = t * phip.values[i];
    if (energy(op, inst, e) < energy_upper - 1.0 &&
        op.norm_lambda_sq(e) > inst.ball_radius * inst.ball_radius)
      return e;
  }
  throw EndpointNotFound("no doubling t <= 2^30 drives the ray energy low enough");
}

/// Feasible initial path: nodewise projection of the straight segment from
/// u_lambda to e. Endpoints are reproduced exactly.
inline MountainPath initial_path(const DiscreteFunction& u_lambda, const DiscreteFunction& e,
                                 int path_points, const DiscreteFunction& phi,
                                 const DiscreteOperator& op, const ProblemInstance& inst) {
  if (path_points < 2) throw ConfigError("mountain-pass path needs at least 2 segments");
  MountainPath path;
  const std::size_t P = static_cast<std::size_t>(path_points);
  path.points.reserve(P + 1);
  for (std::size_t j = 0; j <= P; ++j) {
    const double s = double(j) / double(P);
    DiscreteFunction p = u_lambda;
    for (std::size_t i = 0; i < p.size(); ++i)
      p.values[i] = std::max((1.0 - s) * u_lambda.values[i] + s * e.values[i],
                             phi.values[i]);
    if (j == 0) p = u_lambda;
    if (j == P) p = e;
    path.points.push_back(std::move(p));
  }
  path.energies.resize(P + 1);
  for (std::size_t j = 0; j <= P; ++j)
    path.energies[j] = energy(op, inst, path.points[j]);
  path.peak_index = static_cast<std::size_t>(
      std::max_element(path.energies.begin(), path.energies.end()) - path.energies.begin());
  return path;
}

/// lambda-uniform upper bound for the mountain-pass level: the maximum of
/// the Omega-restricted functional J along the obstacle ray t -> t * e for
/// t in [0, 1], located by a grid scan plus golden-section refinement (so
/// the value is insensitive to the grid resolution).
inline double sigma_bound(const ProblemInstance& inst, const DiscreteOperator& op,
                          const DiscreteFunction& endpoint, int grid_n = 1001) {
  if (grid_n < 3) throw ConfigError("sigma grid too small");
  DiscreteFunction ray = endpoint;
  const auto eval = [&](double t) {
    for (std::size_t i = 0; i < ray.size(); ++i) ray.values[i] = t * endpoint.values[i];
    return j_functional(op, inst, ray);
  };
  double best = -kInf;
  std::size_t best_i = 0;
  for (int i = 0; i < grid_n; ++i) {
    const double t = double(i) / double(grid_n - 1);
    const double v = eval(t);
    if (v > best) {
      best = v;
      best_i = static_cast<std::size_t>(i);
    }
  }
  // golden-section polish on the bracketing interval
  const double golden = 0.61803398874989484820;
  double lo = double(best_i == 0 ? 0 : best_i - 1) / double(grid_n - 1);
  double hi = double(std::min<std::size_t>(best_i + 1, grid_n - 1)) / double(grid_n - 1);
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = eval(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = eval(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

namespace detail {

inline double path_distance(const DiscreteOperator& op, const DiscreteFunction& a,
                            const DiscreteFunction& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a.values[i] - b.values[i];
  return std::sqrt(op.norm_lambda_sq(d));
}

/// Even-arclength resampling of the path (endpoints fixed); points are
/// re-projected onto K. Returns false (leaving the path untouched) if the
/// resampled path would raise the maximal energy.
inline bool reparametrize_by_arclength(MountainPath& path, const DiscreteOperator& op,
                                       const ProblemInstance& inst,
                                       const DiscreteFunction& phi) {
  const std::size_t P = path.segments();
  std::vector<double> cum(P + 1, 0.0);
  for (std::size_t j = 1; j <= P; ++j)
    cum[j] = cum[j - 1] + path_distance(op, path.points[j], path.points[j - 1]);
  if (cum[P] <= 0.0) return false;
  const double old_max = *std::max_element(path.energies.begin(), path.energies.end());

  std::vector<DiscreteFunction> fresh(path.points.size());
  std::vector<double> fresh_e(path.energies.size());
  fresh[0] = path.points[0];
  fresh[P] = path.points[P];
  fresh_e[0] = path.energies[0];
  fresh_e[P] = path.energies[P];
  std::size_t seg = 0;
  for (std::size_t j = 1; j < P; ++j) {
    const double target = cum[P] * double(j) / double(P);
    while (seg + 1 < P && cum[seg + 1] < target) ++seg;
    const double den = std::max(1e-300, cum[seg + 1] - cum[seg]);
    const double s = (target - cum[seg]) / den;
    DiscreteFunction p = path.points[seg];
    for (std::size_t i = 0; i < p.size(); ++i)
      p.values[i] = std::max(
          (1.0 - s) * path.points[seg].values[i] + s * path.points[seg + 1].values[i],
          phi.values[i]);
    p.values.front() = p.values.back() = 0.0;
    fresh_e[j] = energy(op, inst, p);
    fresh[j] = std::move(p);
  }
  const double new_max = *std::max_element(fresh_e.begin(), fresh_e.end());
  if (new_max > old_max + 1e-12) return false;
  path.points = std::move(fresh);
  path.energies = std::move(fresh_e);
  return true;
}

}  // namespace detail

/// Deforms the path until its peak is VI-stationary: per sweep the peak
/// point takes one preconditioned projected-descent step (endpoints never
/// move), its neighbors are re-spread by feasible interpolation, and every
/// respread_every sweeps the path is re-parametrized by cumulative
/// lambda-norm arclength. Once the peak residual is small a semismooth
/// Newton polish sharpens it to w_lambda with c_lambda = I(w_lambda).
inline MountainPassReport deform(MountainPath& path, const DiscreteOperator& op,
                                 const ProblemInstance& inst,
                                 const MountainPassOptions& opts = MountainPassOptions{}) {
  if (path.points.size() < 3) throw ConfigError("path too short to deform");
  const std::size_t P = path.segments();
  const DiscreteFunction phi = obstacle_values(op.mesh_ptr(), inst);
  const double rho = inst.rho();
  const double floor_energy =
      std::max(path.energies.front(), path.energies.back()) + rho / 100.0;
  const double sigma = sigma_bound(inst, op, path.points[P], opts.sigma_grid);

  SolverOptions polish_opts = opts.polish;
  polish_opts.tol = opts.tol;

  MountainPassReport rep;
  rep.rho = rho;
  rep.sigma_bound = sigma;
  rep.energy_u0 = path.energies.front();

  auto finish = [&](const SolveReport& sr, int sweeps, std::vector<TraceRow> trace) {
    rep.solution = sr.solution;
    rep.c_lambda = sr.energy;
    rep.iterations = sweeps;
    rep.comp_residual = sr.comp_residual;
    rep.lambda_norm = sr.lambda_norm;
    rep.localization_max = sr.localization_max;
    rep.concentration = sr.concentration;
    rep.linf_off_O = sr.linf_off_O;
    rep.active_set = sr.active_set;
    rep.status = SolveStatus::converged;
    rep.converged = true;
    rep.trace = std::move(trace);
    if (rep.c_lambda < rho - 1e-8)
      throw PathCollapse("polished peak energy " + std::to_string(rep.c_lambda) +
                         " fell below rho = " + std::to_string(rho));
    return rep;
  };

  std::vector<TraceRow> trace;
  DiscreteFunction cand = path.points[0];
  double prev_max = kInf;
  int stall_count = 0;
  int polish_failures = 0;

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const std::size_t peak = static_cast<std::size_t>(
        std::max_element(path.energies.begin(), path.energies.end()) -
        path.energies.begin());
    path.peak_index = peak;
    if (peak == 0 || peak == P)
      throw PathCollapse("path peak reached an endpoint");

    DiscreteFunction& w = path.points[peak];
    const DiscreteFunction grad = gradient(op, inst, w);
    const std::vector<double> dir = detail::two_metric_direction(
        op, phi, w, grad, 1e-10 * std::max(1e-6, inst.obstacle.amplitude()));
    for (std::size_t i = 0; i < w.size(); ++i)
      cand.values[i] = std::max(w.values[i] - dir[i], phi.values[i]);
    cand.values.front() = cand.values.back() = 0.0;
    std::vector<double> diff(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) diff[i] = w.values[i] - cand.values[i];
    const double stat = std::sqrt(op.norm_lambda_sq(diff));
    if (opts.record_trace) trace.push_back({sweep, path.energies[peak], stat});

    const bool try_polish = stat <= opts.path_tol || sweep % opts.polish_every == 0;
    if (try_polish) {
      bool accepted_polish = false;
      try {
        SolveReport polished = semismooth_newton(inst, op, w, polish_opts);
        // accept the polished point as the saddle when it is a genuine
        // stationary point above the pass level, close to the current peak
        // (the trust radius relaxes once the path has visibly stalled) and
        // distinct from the minimizing endpoint
        const double trust = stall_count >= 100 ? 1.0 : 0.25;
        const bool close = relative_l2_distance(op, polished.solution, w) <= trust;
        const bool above_floor = polished.energy >= rho - 1e-8;
        const bool below_sigma = polished.energy <= sigma + 1e-8;
        const bool not_minimizer =
            relative_l2_distance(op, polished.solution, path.points[0]) > 1e-3;
        if (polished.converged && close && above_floor && below_sigma && not_minimizer &&
            polished.comp_residual <= std::max(opts.tol, 1e-10)) {
          accepted_polish = true;
          return finish(polished, sweep, std::move(trace));
        }
      } catch (const PathCollapse&) {
        throw;
      } catch (const Error&) {
        // a failed polish attempt is not fatal; keep deforming
      }
      if (!accepted_polish && ++polish_failures > 40 && stat <= opts.path_tol)
        throw StallDetected("peak is path-stationary but the Newton polish keeps failing");
    }

    // Armijo projected descent of the peak (never accepts an energy rise).
    // Two guards keep the path a path: the step moves only transverse to
    // the local path tangent (otherwise flank vertices slide down their own
    // valleys along the path and the sampled maximum sinks below the col),
    // and it is capped at half the distance to the neighbors so a vertex
    // cannot jump across the ridge.
    std::vector<double> step = dir;
    {
      std::vector<double> tangent(w.size());
      for (std::size_t i = 0; i < w.size(); ++i)
        tangent[i] = path.points[peak + 1].values[i] - path.points[peak - 1].values[i];
      const std::vector<double> At = op.apply(tangent);
      double tt = 0.0, dt = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        tt += tangent[i] * At[i];
        dt += step[i] * At[i];
      }
      if (tt > 0.0)
        for (std::size_t i = 0; i < w.size(); ++i) step[i] -= (dt / tt) * tangent[i];
      const double cap =
          0.5 * std::min(detail::path_distance(op, w, path.points[peak - 1]),
                         detail::path_distance(op, w, path.points[peak + 1]));
      const double dn = std::sqrt(op.norm_lambda_sq(step));
      if (cap > 0.0 && dn > cap)
        for (auto& v : step) v *= cap / dn;
    }
    const double e0 = path.energies[peak];
    bool accepted = false;
    double tau = 1.0;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      for (std::size_t i = 0; i < w.size(); ++i)
        cand.values[i] = std::max(w.values[i] - tau * step[i], phi.values[i]);
      cand.values.front() = cand.values.back() = 0.0;
      const double ec = energy(op, inst, cand);
      double gdot = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        gdot += grad.values[i] * (cand.values[i] - w.values[i]);
      if (ec < e0 && ec <= e0 + opts.armijo_c1 * std::min(0.0, gdot)) accepted = true;
      else tau *= opts.backtrack;
    }
    if (accepted) {
      std::swap(w.values, cand.values);
      path.energies[peak] = energy(op, inst, w);
    }

    // local re-spread of the peak neighbors by feasible interpolation
    const double cur_max = *std::max_element(path.energies.begin(), path.energies.end());
    for (std::size_t j : {peak - 1, peak + 1}) {
      if (j == 0 || j >= P) continue;
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand.values[i] = std::max(
            0.5 * (path.points[j - 1].values[i] + path.points[j + 1].values[i]),
            phi.values[i]);
      cand.values.front() = cand.values.back() = 0.0;
      const double ec = energy(op, inst, cand);
      if (ec <= cur_max) {
        std::swap(path.points[j].values, cand.values);
        path.energies[j] = ec;
      }
    }

    if (opts.respread_every > 0 && sweep % opts.respread_every == 0)
      detail::reparametrize_by_arclength(path, op, inst, phi);

    const double max_e = *std::max_element(path.energies.begin(), path.energies.end());
    if (max_e < floor_energy && stat > opts.tol)
      throw PathCollapse("path maximum sank to the endpoint level at sweep " +
                         std::to_string(sweep));
    if (prev_max - max_e < 1e-14 && stat > opts.path_tol) {
      if (++stall_count >= 400)
        throw StallDetected("no energy decrease for 400 sweeps at residual " +
                            std::to_string(stat));
    } else {
      stall_count = 0;
    }
    prev_max = max_e;
  }

  // max_sweeps exhausted: report the current peak, flagged unconverged
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(path.energies.begin(), path.energies.end()) - path.energies.begin());
  SolverOptions fin;
  SolveReport sr = detail::finalize_report(inst, op, path.points[peak], opts.max_sweeps,
                                           SolveStatus::max_iter_exceeded, fin);
  rep.solution = sr.solution;
  rep.c_lambda = sr.energy;
  rep.iterations = opts.max_sweeps;
  rep.comp_residual = sr.comp_residual;
  rep.lambda_norm = sr.lambda_norm;
  rep.localization_max = sr.localization_max;
  rep.concentration = sr.concentration;
  rep.linf_off_O = sr.linf_off_O;
  rep.active_set = sr.active_set;
  rep.status = SolveStatus::max_iter_exceeded;
  rep.converged = false;
  rep.trace = std::move(trace);
  return rep;
}

}  // namespace obstacle
