// Continuous problem data for the penalized obstacle problem on the line:
// the nonlinearity f and its primitive F, the potential well V, the obstacle
// phi, the penalization (h, g, G) built from the threshold f(a)/a = 1/k, and
// the validators for the structural hypotheses the solvers rely on.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "obstacle/detail/pchip.hpp"
#include "obstacle/errors.hpp"

namespace obstacle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Nonlinearity

enum class NonlinearityKind { power, tabulated };

/// Superlinear nonlinearity with f(t) = 0 for t <= 0. Either the power
/// family f(t) = t^p (p > 1) or a monotone cubic spline through samples.
/// `theta` is the superquadratic exponent used by the growth checks; for the
/// power family theta = p + 1 and theta*F(t) = f(t)*t holds exactly.
class NonlinearitySpec {
 public:
  static NonlinearitySpec power(double p) {
    if (!(p > 1.0)) throw ConfigError("power nonlinearity requires p > 1");
    NonlinearitySpec s;
    s.kind_ = NonlinearityKind::power;
    s.p_ = p;
    s.theta_ = p + 1.0;
    return s;
  }

  static NonlinearitySpec tabulated(std::vector<double> t, std::vector<double> f,
                                    double theta) {
    if (t.empty() || t.front() != 0.0 || f.empty() || f.front() != 0.0)
      throw ConfigError("tabulated nonlinearity must start at (0, 0)");
    if (!(theta > 2.0)) throw ConfigError("tabulated nonlinearity requires theta > 2");
    NonlinearitySpec s;
    s.kind_ = NonlinearityKind::tabulated;
    s.theta_ = theta;
    s.spline_ = detail::Pchip(std::move(t), std::move(f));
    return s;
  }

  NonlinearityKind kind() const { return kind_; }
  double p() const { return p_; }
  double theta() const { return theta_; }
  double table_max() const {
    return kind_ == NonlinearityKind::tabulated ? spline_.max_x() : kInf;
  }

  double f(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == NonlinearityKind::power) return std::pow(t, p_);
    return std::max(0.0, spline_.value(t));
  }

  /// F(t) = integral of f from 0 to t; zero for t <= 0.
  double F(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == NonlinearityKind::power) return std::pow(t, p_ + 1.0) / (p_ + 1.0);
    return spline_.antiderivative(t);
  }

  /// One-sided derivative of f (0 for t <= 0).
  double df(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == NonlinearityKind::power) return p_ * std::pow(t, p_ - 1.0);
    return spline_.derivative(t);
  }

 private:
  NonlinearityKind kind_ = NonlinearityKind::power;
  double p_ = 3.0;
  double theta_ = 4.0;
  detail::Pchip spline_;
};

// ---------------------------------------------------------------------------
// Potential

enum class PotentialKind { well, tabulated };

/// Nonnegative continuous potential vanishing exactly on the closed interval
/// [o_left, o_right]; O = (o_left, o_right) is the open zero set interior.
class PotentialSpec {
 public:
  static PotentialSpec well(double o_left, double o_right, double cap, double slope) {
    if (!(o_left < o_right)) throw ConfigError("potential: o_left < o_right required");
    if (!(cap > 0.0) || !(slope > 0.0))
      throw ConfigError("potential: cap and slope must be positive");
    PotentialSpec s;
    s.kind_ = PotentialKind::well;
    s.o_left_ = o_left;
    s.o_right_ = o_right;
    s.cap_ = cap;
    s.slope_ = slope;
    return s;
  }

  static PotentialSpec tabulated(std::vector<double> x, std::vector<double> v,
                                 double o_left, double o_right) {
    if (x.size() != v.size() || x.size() < 2)
      throw ConfigError("tabulated potential needs matching x/v samples");
    if (!(o_left < o_right)) throw ConfigError("potential: o_left < o_right required");
    PotentialSpec s;
    s.kind_ = PotentialKind::tabulated;
    s.o_left_ = o_left;
    s.o_right_ = o_right;
    s.x_ = std::move(x);
    s.v_ = std::move(v);
    return s;
  }

  PotentialKind kind() const { return kind_; }
  double o_left() const { return o_left_; }
  double o_right() const { return o_right_; }

  double V(double x) const {
    if (kind_ == PotentialKind::well) {
      const double d = std::max(0.0, std::max(o_left_ - x, x - o_right_));
      return std::min(cap_, slope_ * d * d);
    }
    // piecewise-linear table, clamped outside its range
    if (x <= x_.front()) return v_.front();
    if (x >= x_.back()) return v_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double s = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return (1.0 - s) * v_[i] + s * v_[i + 1];
  }

 private:
  PotentialKind kind_ = PotentialKind::well;
  double o_left_ = -1.0, o_right_ = 1.0, cap_ = 1.0, slope_ = 1.0;
  std::vector<double> x_, v_;
};

// ---------------------------------------------------------------------------
// Obstacle

enum class ObstacleKind { bump, tabulated };

/// Obstacle with nontrivial positive part of compact support. The bump
/// family is A * max(0, 1 - ((x-c)/w)^2), optionally continued by a negative
/// tail ramping to -tail_depth over one extra halfwidth.
class ObstacleSpec {
 public:
  static ObstacleSpec bump(double center, double halfwidth, double amplitude,
                           double tail_depth = 0.0) {
    if (!(halfwidth > 0.0)) throw ConfigError("obstacle: halfwidth must be positive");
    if (!(amplitude > 0.0)) throw ConfigError("obstacle: amplitude must be positive");
    if (tail_depth < 0.0) throw ConfigError("obstacle: tail depth must be >= 0");
    ObstacleSpec s;
    s.kind_ = ObstacleKind::bump;
    s.center_ = center;
    s.halfwidth_ = halfwidth;
    s.amplitude_ = amplitude;
    s.tail_ = tail_depth;
    return s;
  }

  static ObstacleSpec tabulated(std::vector<double> x, std::vector<double> phi) {
    if (x.size() != phi.size() || x.size() < 2)
      throw ConfigError("tabulated obstacle needs matching x/phi samples");
    ObstacleSpec s;
    s.kind_ = ObstacleKind::tabulated;
    s.x_ = std::move(x);
    s.p_ = std::move(phi);
    return s;
  }

  ObstacleKind kind() const { return kind_; }
  double amplitude() const {
    if (kind_ == ObstacleKind::bump) return amplitude_;
    return *std::max_element(p_.begin(), p_.end());
  }

  double phi(double x) const {
    if (kind_ == ObstacleKind::bump) {
      const double s = (x - center_) / halfwidth_;
      const double as = std::abs(s);
      if (as <= 1.0) return amplitude_ * (1.0 - s * s);
      if (tail_ == 0.0) return 0.0;
      return -tail_ * std::min(1.0, as - 1.0);
    }
    if (x <= x_.front()) return p_.front();
    if (x >= x_.back()) return p_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double s = (x - x_[i]) / (x_[i + 1] - x_[i]);
    return (1.0 - s) * p_[i] + s * p_[i + 1];
  }

  double phi_plus(double x) const { return std::max(0.0, phi(x)); }

  /// Left end of supp(phi_plus).
  double support_left() const {
    if (kind_ == ObstacleKind::bump) return center_ - halfwidth_;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      if (p_[i] > 0.0) return x_[i];
      if (p_[i + 1] > 0.0) {
        if (p_[i] >= 0.0) return x_[i];
        return x_[i] + (x_[i + 1] - x_[i]) * (-p_[i]) / (p_[i + 1] - p_[i]);
      }
    }
    return 0.0;
  }

  double support_right() const {
    if (kind_ == ObstacleKind::bump) return center_ + halfwidth_;
    for (std::size_t i = x_.size(); i-- > 1;) {
      if (p_[i] > 0.0) return x_[i];
      if (p_[i - 1] > 0.0) {
        if (p_[i] >= 0.0) return x_[i];
        return x_[i - 1] + (x_[i] - x_[i - 1]) * p_[i - 1] / (p_[i - 1] - p_[i]);
      }
    }
    return 0.0;
  }

  /// Exact squared H^1 norm of the positive part phi_plus.
  double h1_norm_sq_plus() const {
    if (kind_ == ObstacleKind::bump) {
      const double A = amplitude_, w = halfwidth_;
      return A * A * (16.0 * w / 15.0 + 8.0 / (3.0 * w));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
      acc += segment_plus_energy(x_[i], x_[i + 1], p_[i], p_[i + 1]);
    return acc;
  }

  /// Kink locations plus the peak, so the nodal interpolant of phi_plus is
  /// nontrivial on every aligned mesh.
  std::vector<double> breakpoints() const {
    if (kind_ == ObstacleKind::bump) {
      std::vector<double> b = {center_ - halfwidth_, center_, center_ + halfwidth_};
      if (tail_ > 0.0) {
        b.push_back(center_ - 2.0 * halfwidth_);
        b.push_back(center_ + 2.0 * halfwidth_);
      }
      return b;
    }
    return x_;
  }

 private:
  // integral of phi_plus'^2 + phi_plus^2 over one linear segment
  static double segment_plus_energy(double x0, double x1, double p0, double p1) {
    const double h = x1 - x0;
    if (p0 <= 0.0 && p1 <= 0.0) return 0.0;
    const double slope = (p1 - p0) / h;
    if (p0 >= 0.0 && p1 >= 0.0)
      return slope * slope * h + h * (p0 * p0 + p0 * p1 + p1 * p1) / 3.0;
    // one sign change: positive sub-triangle of length ell with peak pm
    const double pm = std::max(p0, p1);
    const double ell = h * pm / std::abs(p1 - p0);
    return slope * slope * ell + ell * pm * pm / 3.0;
  }

  ObstacleKind kind_ = ObstacleKind::bump;
  double center_ = 0.0, halfwidth_ = 0.5, amplitude_ = 0.18, tail_ = 0.0;
  std::vector<double> x_, p_;
};

// ---------------------------------------------------------------------------
// Penalization

/// Threshold data of the modified nonlinearity: h(t) = f(t) below a and t/k
/// above, glued continuously by f(a)/a = 1/k, active outside the open set
/// Omega = (omega_left, omega_right).
struct PenalizedNonlinearity {
  double k = 4.0;
  double a = 0.5;
  double omega_left = -1.5;
  double omega_right = 1.5;

  /// Penalization disabled: h == f everywhere, so g == f regardless of x.
  /// Only used by tests and by the limit problem on O.
  static PenalizedNonlinearity none(double omega_left = -1.0, double omega_right = 1.0) {
    return {4.0, kInf, omega_left, omega_right};
  }
};

/// Smallest a > 0 with f(a)/a = 1/k, located by a log-grid scan for the
/// first sign change of f(t)/t - 1/k followed by bisection.
inline double solve_threshold_a(const NonlinearitySpec& f, double k) {
  const double target = 1.0 / k;
  double t_max;
  if (f.kind() == NonlinearityKind::power) {
    t_max = 10.0 * std::pow(k, 1.0 / (1.0 - f.p()));
  } else {
    t_max = f.table_max();
  }
  const auto q = [&](double t) { return f.f(t) / t; };
  const int n_scan = 512;
  double lo = t_max * 1e-12;
  if (q(lo) >= target)
    throw NoBracket("f(t)/t already exceeds 1/k arbitrarily close to 0");
  double hi = -1.0;
  for (int i = 1; i <= n_scan; ++i) {
    const double t = t_max * std::pow(1e-12, 1.0 - double(i) / n_scan);
    if (q(t) >= target) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0)
    throw NoBracket("f(t)/t never reaches 1/k on (0, " + std::to_string(t_max) + "]");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (q(mid) < target ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  if (std::abs(q(a) - target) > 1e-12)
    throw NoBracket("bisection for f(a)/a = 1/k did not reach tolerance");
  return a;
}

/// Builds the penalization for a given admissible k and Omega.
inline PenalizedNonlinearity make_penalization(const NonlinearitySpec& f, double k,
                                               double omega_left, double omega_right) {
  const double k_min = std::max(f.theta() / (f.theta() - 2.0), 2.0);
  if (!(k > k_min))
    throw ConfigError("penalization requires k > max(theta/(theta-2), 2) = " +
                      std::to_string(k_min));
  if (!(omega_left < omega_right)) throw ConfigError("omega_left < omega_right required");
  return {k, solve_threshold_a(f, k), omega_left, omega_right};
}

// ---------------------------------------------------------------------------
// Problem instance

/// Full continuous problem: minimize/solve the variational inequality for
/// I_lambda(u) = 1/2 ||u||_lambda^2 - int G(x, u) over {u >= phi} on the
/// truncated domain [-L, L] with homogeneous Dirichlet values.
struct ProblemInstance {
  NonlinearitySpec nonlinearity = NonlinearitySpec::power(3.0);
  PotentialSpec potential = PotentialSpec::well(-1.0, 1.0, 1.0, 1.0);
  ObstacleSpec obstacle = ObstacleSpec::bump(0.0, 0.5, 0.18);
  PenalizedNonlinearity penalization{4.0, 0.5, -1.5, 1.5};
  double lambda = 1.0;
  double domain_halfwidth = 8.0;  // L
  double ball_radius = 1.0;       // r
  bool relax_smallness = false;

  bool in_omega(double x) const {
    return x > penalization.omega_left && x < penalization.omega_right;
  }

  /// h(t): f below the threshold a, linear slope 1/k above.
  double h(double t) const {
    if (t <= penalization.a) return nonlinearity.f(t);
    return t / penalization.k;
  }

  /// g(x, t) = chi_Omega(x) f(t) + (1 - chi_Omega(x)) h(t).
  double g(double x, double t) const {
    if (in_omega(x)) return nonlinearity.f(t);
    return h(t);
  }

  /// G(x, t) = int_0^t g(x, s) ds in closed form per branch.
  double G(double x, double t) const {
    if (in_omega(x) || t <= penalization.a) return nonlinearity.F(t);
    const double a = penalization.a;
    return nonlinearity.F(a) + (t * t - a * a) / (2.0 * penalization.k);
  }

  /// Derivative of g in t (one-sided at the gluing point).
  double dg(double x, double t) const {
    if (in_omega(x) || t <= penalization.a) return nonlinearity.df(t);
    return 1.0 / penalization.k;
  }

  double rho() const { return ball_radius * ball_radius / 8.0; }

  static ProblemInstance default_instance(double lambda = 1.0) {
    ProblemInstance inst;
    inst.nonlinearity = NonlinearitySpec::power(3.0);
    inst.potential = PotentialSpec::well(-1.0, 1.0, 1.0, 1.0);
    inst.obstacle = ObstacleSpec::bump(0.0, 0.5, 0.18);
    inst.penalization = make_penalization(inst.nonlinearity, 4.0, -1.5, 1.5);
    inst.lambda = lambda;
    inst.domain_halfwidth = 8.0;
    inst.ball_radius = 1.0;
    return inst;
  }
};

// ---------------------------------------------------------------------------
// Hypothesis validation

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // >= 0 means satisfied; the worst slack observed
  double witness_x = 0.0;
  double witness_t = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  const ValidationCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }
};

/// Throws HypothesisViolated carrying the first failing check.
inline void require_valid(const ValidationReport& report) {
  if (const ValidationCheck* c = report.first_failure())
    throw HypothesisViolated(c->name, c->margin, c->witness_x, c->witness_t);
}

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, double(i) / double(n - 1));
  return g;
}

}  // namespace detail

/// Samples the structural hypotheses on (f, g): monotonicity of f, the
/// vanishing-slope and smallness forms of (f1), the superquadratic growth
/// (f2), continuity of h at the threshold, admissibility of k, and the
/// growth chain 2G(x,t) <= g(x,t) t <= (1/k)(1+lambda V(x)) t^2 off Omega.
/// Margins are relative to the local scale; a check passes when its margin
/// stays >= -1e-12.
inline ValidationReport validate_hypotheses(const ProblemInstance& inst,
                                            std::size_t samples = 10000) {
  constexpr double kTol = 1e-12;
  ValidationReport rep;
  const auto& f = inst.nonlinearity;
  const double theta = f.theta();
  const double a = inst.penalization.a;
  const double k = inst.penalization.k;
  const double r = inst.ball_radius;

  const std::size_t nx = 32;
  const std::size_t nt = std::max<std::size_t>(16, samples / nx);
  double t_hi = 64.0 * std::max(inst.obstacle.amplitude(), std::isfinite(a) ? a : 1.0);
  if (f.kind() == NonlinearityKind::tabulated) t_hi = std::min(t_hi, f.table_max());

  {  // monotone f on [-t_hi, t_hi]
    ValidationCheck c{.name = "f_monotone"};
    c.pass = true;
    c.margin = kInf;
    auto grid = detail::log_grid(1e-10 * t_hi, t_hi, nt);
    std::vector<double> ts;
    for (double t : grid) ts.push_back(-t);
    std::sort(ts.begin(), ts.end());
    ts.insert(ts.end(), grid.begin(), grid.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double d = f.f(ts[i + 1]) - f.f(ts[i]);
      const double m = d / std::max(1.0, std::abs(f.f(ts[i + 1])));
      if (m < c.margin) {
        c.margin = m;
        c.witness_t = ts[i + 1];
      }
    }
    c.pass = c.margin >= -kTol;
    rep.checks.push_back(c);
  }

  {  // (f1), trend form: |f(t)/t| nonincreasing as t -> 0+
    ValidationCheck c{.name = "f1_slope_trend"};
    c.margin = kInf;
    const double lo = std::min(1e-9, (std::isfinite(a) ? a : 1.0) * 1e-6);
    const double hi = std::isfinite(a) ? a : std::min(1.0, t_hi);
    auto grid = detail::log_grid(lo, hi, nt);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double q0 = f.f(grid[i]) / grid[i];
      const double q1 = f.f(grid[i + 1]) / grid[i + 1];
      const double m = (q1 - q0) / std::max(1.0, std::abs(q1));
      if (m < c.margin) {
        c.margin = m;
        c.witness_t = grid[i];
      }
    }
    c.pass = c.margin >= -kTol;
    c.detail = "f(t)/t must grow with t near 0 so that it vanishes at 0";
    rep.checks.push_back(c);
  }

  {  // (f1), smallness form used by the coercivity bound: F(t) <= t^2/4 for
     // |t| <= r/sqrt(2) (the sup-norm reach of the ball ||u||_lambda <= r)
    ValidationCheck c{.name = "f1_smallness_in_ball"};
    c.margin = kInf;
    const double cap = r / std::sqrt(2.0);
    auto grid = detail::log_grid(1e-9 * cap, cap, nt);
    for (double t : grid) {
      const double m = (t * t / 4.0 - f.F(t)) / std::max(1.0, t * t / 4.0);
      if (m < c.margin) {
        c.margin = m;
        c.witness_t = t;
      }
    }
    c.pass = c.margin >= -kTol;
    rep.checks.push_back(c);
  }

  {  // (f2): theta F(t) <= f(t) t for t > 0
    ValidationCheck c{.name = "f2_superquadratic"};
    c.margin = kInf;
    auto grid = detail::log_grid(1e-10 * t_hi, t_hi, nt);
    for (double t : grid) {
      const double ft = f.f(t) * t;
      const double m = (ft - theta * f.F(t)) / std::max(1.0, std::abs(ft));
      if (m < c.margin) {
        c.margin = m;
        c.witness_t = t;
      }
    }
    c.pass = c.margin >= -kTol;
    rep.checks.push_back(c);
  }

  if (std::isfinite(a)) {  // h continuous at the gluing point
    ValidationCheck c{.name = "h_continuous_at_a"};
    const double diff = std::abs(f.f(a) - a / k);
    c.margin = 1e-10 - diff / std::max(1.0, a / k);
    c.witness_t = a;
    c.pass = c.margin >= 0.0;
    rep.checks.push_back(c);
  }

  {  // admissible k
    ValidationCheck c{.name = "k_admissible"};
    c.margin = k - std::max(theta / (theta - 2.0), 2.0);
    c.pass = c.margin > 0.0;
    rep.checks.push_back(c);
  }

  {  // growth chain (2.3): 2G <= g t <= (1/k)(1 + lambda V) t^2 off Omega
    ValidationCheck c{.name = "g_growth_chain"};
    c.margin = kInf;
    const double L = inst.domain_halfwidth;
    std::vector<double> xs;
    for (std::size_t j = 0; j < nx / 2; ++j) {
      const double s = double(j) / double(nx / 2 - 1);
      const double x = inst.penalization.omega_right +
                       s * (L - inst.penalization.omega_right);
      xs.push_back(x);
      xs.push_back(-x);
    }
    auto grid = detail::log_grid(1e-8 * t_hi, t_hi, nt);
    std::vector<double> ts;
    for (double t : grid) {
      ts.push_back(t);
      ts.push_back(-t);
    }
    for (double x : xs) {
      const double cap = (1.0 + inst.lambda * inst.potential.V(x)) / k;
      for (double t : ts) {
        const double gt = inst.g(x, t) * t;
        const double scale = std::max(1.0, std::abs(gt));
        const double m1 = (gt - 2.0 * inst.G(x, t)) / scale;
        const double m2 = (cap * t * t - gt) / std::max(1.0, cap * t * t);
        const double m = std::min(m1, m2);
        if (m < c.margin) {
          c.margin = m;
          c.witness_x = x;
          c.witness_t = t;
        }
      }
    }
    c.pass = c.margin >= -kTol;
    rep.checks.push_back(c);
  }

  return rep;
}

/// Geometry of the sets: supp(phi_plus) strictly inside O, closure(O)
/// strictly inside Omega, Omega inside (-L, L) with margin, the obstacle
/// compatible with the Dirichlet truncation, the potential an admissible
/// well, and the smallness condition 4 ||phi_plus||^2 < r^2.
inline ValidationReport validate_geometry(const ProblemInstance& inst) {
  ValidationReport rep;
  const double oL = inst.potential.o_left(), oR = inst.potential.o_right();
  const double wL = inst.penalization.omega_left, wR = inst.penalization.omega_right;
  const double L = inst.domain_halfwidth;
  const double sL = inst.obstacle.support_left(), sR = inst.obstacle.support_right();

  auto push = [&rep](std::string name, double margin, double wx, std::string detail = "") {
    rep.checks.push_back(
        {std::move(name), margin > 0.0, margin, wx, 0.0, std::move(detail)});
  };

  push("support_in_O", std::min(sL - oL, oR - sR), sL - oL <= oR - sR ? sL : sR,
       "supp(phi+) must be strictly inside O");
  push("O_in_Omega", std::min(oL - wL, wR - oR), oL - wL <= wR - oR ? oL : oR,
       "closure(O) must be strictly inside Omega");
  push("Omega_in_domain", std::min(wL + L, L - wR), wL + L <= L - wR ? wL : wR,
       "Omega must be inside (-L, L) with margin");

  {
    ValidationCheck c{.name = "phi_nonpositive_at_boundary"};
    c.margin = -std::max(inst.obstacle.phi(-L), inst.obstacle.phi(L));
    c.witness_x = inst.obstacle.phi(-L) >= inst.obstacle.phi(L) ? -L : L;
    c.pass = c.margin >= 0.0;
    c.detail = "Dirichlet truncation requires phi(+-L) <= 0";
    rep.checks.push_back(c);
  }

  {
    ValidationCheck c{.name = "phi_plus_nontrivial"};
    c.margin = inst.obstacle.h1_norm_sq_plus();
    c.pass = c.margin > 0.0;
    rep.checks.push_back(c);
  }

  {  // V == 0 exactly on [oL, oR], V > 0 outside, V >= 0 everywhere
    ValidationCheck c{.name = "V_well_shape"};
    c.margin = kInf;
    c.pass = true;
    const std::size_t ns = 257;
    for (std::size_t i = 0; i < ns; ++i) {
      const double x = -L + 2.0 * L * double(i) / double(ns - 1);
      const double v = inst.potential.V(x);
      if (v < 0.0 || (x >= oL && x <= oR && v != 0.0)) {
        c.pass = false;
        c.margin = -std::abs(v);
        c.witness_x = x;
        break;
      }
    }
    if (c.pass) {
      const double probe = std::min(wR - oR, oL - wL) / 2.0;
      const double vout =
          std::min(inst.potential.V(oR + probe), inst.potential.V(oL - probe));
      c.margin = vout;
      c.pass = vout > 0.0;
      c.witness_x = oR + probe;
      c.detail = "V must be positive off closure(O)";
    }
    rep.checks.push_back(c);
  }

  {  // 4 ||phi+||^2 < r^2 (exact continuous norm)
    ValidationCheck c{.name = "smallness_4phi2_lt_r2"};
    const double r2 = inst.ball_radius * inst.ball_radius;
    const double m = (r2 - 4.0 * inst.obstacle.h1_norm_sq_plus()) / r2;
    c.margin = m;
    c.pass = inst.relax_smallness || m > 0.0;
    if (inst.relax_smallness && m <= 0.0) c.detail = "violated but relaxed by flag";
    rep.checks.push_back(c);
  }

  return rep;
}

}  // namespace obstacle
