// P1 discretization on the truncated line: breakpoint-aligned meshes, nodal
// functions, the tridiagonal lambda-norm operator (exact stiffness + lumped
// weighted mass), the discrete energy/gradient pair, and the nodewise
// projection onto the obstacle set K.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "obstacle/detail/tridiag.hpp"
#include "obstacle/errors.hpp"
#include "obstacle/model.hpp"

namespace obstacle {

// ---------------------------------------------------------------------------
// Mesh

struct Mesh {
  std::vector<double> nodes;    // strictly increasing, nodes.front() = -L
  std::vector<double> spacing;  // spacing[i] = nodes[i+1] - nodes[i]

  std::size_t size() const { return nodes.size(); }
  double left() const { return nodes.front(); }
  double right() const { return nodes.back(); }

  static std::shared_ptr<const Mesh> from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 3) throw ConfigError("mesh needs at least 3 nodes");
    Mesh m;
    m.nodes = std::move(nodes);
    m.spacing.resize(m.nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i) {
      m.spacing[i] = m.nodes[i + 1] - m.nodes[i];
      if (!(m.spacing[i] > 0.0))
        throw ConfigError("mesh nodes must be strictly increasing");
    }
    return std::make_shared<const Mesh>(std::move(m));
  }

  /// Index of the node equal to x (within tolerance); throws if absent.
  std::size_t index_of(double x, double tol = 1e-12) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x - tol);
    if (it == nodes.end() || std::abs(*it - x) > tol)
      throw ConfigError("mesh has no node at x = " + std::to_string(x));
    return static_cast<std::size_t>(it - nodes.begin());
  }
};

/// Breakpoint-aligned mesh over [-L, L] with n nodes: starts from the kinks
/// of Omega, O and the obstacle, then repeatedly bisects the widest cell
/// (leftmost on ties) until the node count is reached. Deterministic.
inline std::shared_ptr<const Mesh> build_mesh(const ProblemInstance& inst,
                                              std::size_t n) {
  const double L = inst.domain_halfwidth;
  std::set<double> bp = {-L, L,
                         inst.penalization.omega_left, inst.penalization.omega_right,
                         inst.potential.o_left(), inst.potential.o_right()};
  for (double b : inst.obstacle.breakpoints())
    if (b > -L && b < L) bp.insert(b);
  std::vector<double> nodes(bp.begin(), bp.end());
  if (nodes.front() != -L || nodes.back() != L)
    throw ConfigError("breakpoints must lie inside [-L, L]");
  if (n < nodes.size())
    throw ConfigError("mesh size " + std::to_string(n) + " cannot align " +
                      std::to_string(nodes.size()) + " breakpoints");
  while (nodes.size() < n) {
    std::size_t widest = 0;
    double wmax = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double w = nodes[i + 1] - nodes[i];
      if (w > wmax + 1e-15) {
        wmax = w;
        widest = i;
      }
    }
    nodes.insert(nodes.begin() + widest + 1, 0.5 * (nodes[widest] + nodes[widest + 1]));
  }
  return Mesh::from_nodes(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Nodal functions

/// Nodal values on a mesh; the piecewise-linear interpolant is implied.
/// Boundary values are 0 for every function the solvers produce.
struct DiscreteFunction {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  static DiscreteFunction zeros(std::shared_ptr<const Mesh> mesh) {
    DiscreteFunction u;
    u.values.assign(mesh->size(), 0.0);
    u.mesh = std::move(mesh);
    return u;
  }

  template <class Fn>
  static DiscreteFunction interpolate(std::shared_ptr<const Mesh> mesh, Fn&& fn) {
    DiscreteFunction u = zeros(mesh);
    for (std::size_t i = 0; i < mesh->size(); ++i) u.values[i] = fn(mesh->nodes[i]);
    return u;
  }
};

/// Nodal interpolant of the obstacle.
inline DiscreteFunction obstacle_values(std::shared_ptr<const Mesh> mesh,
                                        const ProblemInstance& inst) {
  return DiscreteFunction::interpolate(std::move(mesh),
                                       [&](double x) { return inst.obstacle.phi(x); });
}

/// Nodewise max(u, phi): the closest point of the discrete K in any diagonal
/// inner product. Idempotent.
inline DiscreteFunction project_K(const DiscreteFunction& u, const DiscreteFunction& phi) {
  DiscreteFunction out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = std::max(u.values[i], phi.values[i]);
  return out;
}

inline void write_csv(const DiscreteFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IOFailure("cannot open " + path + " for writing");
  os << "x,value\n";
  char buf[128];
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.mesh->nodes[i], u.values[i]);
    os << buf;
  }
  if (!os) throw IOFailure("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Operator

/// Discrete lambda-norm operator A = K_stiff + M_V with K_stiff the exact P1
/// stiffness matrix and M_V the lumped mass with weights w_i (1 + lambda V_i).
/// ||u||_lambda,h^2 = u^T A u. The interior block (Dirichlet rows pinned) is
/// prefactored once; it is SPD and serves as the Riesz map of the E_lambda
/// inner product.
class DiscreteOperator {
 public:
  DiscreteOperator(std::shared_ptr<const Mesh> mesh, double lambda,
                   std::vector<double> potential_values)
      : mesh_(std::move(mesh)), lambda_(lambda), potential_(std::move(potential_values)) {
    const std::size_t n = mesh_->size();
    stiff_diag_.assign(n, 0.0);
    stiff_off_.assign(n - 1, 0.0);
    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = mesh_->spacing[i];
      if (!(h > 1e-300)) throw SingularAssembly("cell width underflow");
      stiff_diag_[i] += 1.0 / h;
      stiff_diag_[i + 1] += 1.0 / h;
      stiff_off_[i] = -1.0 / h;
      weights_[i] += 0.5 * h;
      weights_[i + 1] += 0.5 * h;
    }
    diag_ = stiff_diag_;
    for (std::size_t i = 0; i < n; ++i) diag_[i] += mass_weight(i);
    std::vector<char> free(n, 1);
    free[0] = 0;
    free[n - 1] = 0;
    riesz_.factor(diag_, stiff_off_, free);
  }

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return mesh_->size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& potential() const { return potential_; }
  const std::vector<double>& diag() const { return diag_; }
  const std::vector<double>& off() const { return stiff_off_; }

  /// Lumped weighted mass w_i (1 + lambda V_i).
  double mass_weight(std::size_t i) const {
    return weights_[i] * (1.0 + lambda_ * potential_[i]);
  }

  std::vector<double> apply(const std::vector<double>& u) const {
    return detail::tridiag_apply(diag_, stiff_off_, u);
  }

  double norm_lambda_sq(const std::vector<double>& u) const {
    const std::vector<double> Au = apply(u);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * Au[i];
    return std::max(0.0, s);
  }
  double norm_lambda_sq(const DiscreteFunction& u) const { return norm_lambda_sq(u.values); }
  double norm_lambda(const DiscreteFunction& u) const { return std::sqrt(norm_lambda_sq(u)); }

  /// Plain discrete H^1 norm squared (lambda = 0 weights).
  double h1_norm_sq(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
      const double d = u[i + 1] - u[i];
      s += d * d / mesh_->spacing[i];
    }
    for (std::size_t i = 0; i < u.size(); ++i) s += weights_[i] * u[i] * u[i];
    return s;
  }
  double h1_norm_sq(const DiscreteFunction& u) const { return h1_norm_sq(u.values); }

  /// Lumped L^2 norm squared.
  double l2_norm_sq(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += weights_[i] * u[i] * u[i];
    return s;
  }

  /// Solves A d = rhs on the interior (d = 0 at the Dirichlet nodes).
  std::vector<double> riesz_solve(const std::vector<double>& rhs) const {
    std::vector<double> b = rhs;
    b.front() = b.back() = 0.0;
    return riesz_.solve(b);
  }

  /// lambda * sum w_i V_i u_i^2, the concentration functional.
  double concentration(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      s += weights_[i] * potential_[i] * u[i] * u[i];
    return lambda_ * s;
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  double lambda_;
  std::vector<double> potential_;
  std::vector<double> stiff_diag_, stiff_off_, weights_, diag_;
  detail::TridiagLDL riesz_;
};

/// Assembles the lambda-norm operator for the instance on the given mesh.
inline DiscreteOperator assemble(const ProblemInstance& inst,
                                 std::shared_ptr<const Mesh> mesh) {
  std::vector<double> V(mesh->size());
  for (std::size_t i = 0; i < mesh->size(); ++i) V[i] = inst.potential.V(mesh->nodes[i]);
  return DiscreteOperator(std::move(mesh), inst.lambda, std::move(V));
}

// ---------------------------------------------------------------------------
// Energy and gradient

/// Smooth part of the discrete energy: 1/2 u^T A u - sum_i w_i G(x_i, u_i).
/// The obstacle indicator is handled by the solvers, not here.
inline double energy(const DiscreteOperator& op, const ProblemInstance& inst,
                     const DiscreteFunction& u) {
  double nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    nl += op.weights()[i] * inst.G(op.mesh().nodes[i], u.values[i]);
  return 0.5 * op.norm_lambda_sq(u) - nl;
}

/// Exact gradient of `energy` with respect to the nodal values:
/// A u - diag(w) g(x, u).
inline DiscreteFunction gradient(const DiscreteOperator& op, const ProblemInstance& inst,
                                 const DiscreteFunction& u) {
  DiscreteFunction out;
  out.mesh = u.mesh;
  out.values = op.apply(u.values);
  for (std::size_t i = 0; i < u.size(); ++i)
    out.values[i] -= op.weights()[i] * inst.g(op.mesh().nodes[i], u.values[i]);
  return out;
}

/// The lambda-free functional J(u) = 1/2 int_Omega (u'^2 + u^2) - int_Omega F(u)
/// with all quadrature restricted to cells inside closure(Omega).
inline double j_functional(const DiscreteOperator& op, const ProblemInstance& inst,
                           const DiscreteFunction& u) {
  const auto& nodes = op.mesh().nodes;
  const double wl = inst.penalization.omega_left, wr = inst.penalization.omega_right;
  double stiff = 0.0;
  std::vector<double> womega(u.size(), 0.0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    if (nodes[i] >= wl - 1e-14 && nodes[i + 1] <= wr + 1e-14) {
      const double d = u.values[i + 1] - u.values[i];
      const double h = op.mesh().spacing[i];
      stiff += d * d / h;
      womega[i] += 0.5 * h;
      womega[i + 1] += 0.5 * h;
    }
  }
  double mass = 0.0, nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mass += womega[i] * u.values[i] * u.values[i];
    nl += womega[i] * inst.nonlinearity.F(u.values[i]);
  }
  return 0.5 * (stiff + mass) - nl;
}

/// Diagnostic mass of the truncation boundary layer:
/// int_{|x| > L/2} (u'^2 + u^2).
inline double boundary_layer_mass(const DiscreteOperator& op, const DiscreteFunction& u) {
  const auto& nodes = op.mesh().nodes;
  const double half = 0.5 * op.mesh().right();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    if (nodes[i + 1] <= -half || nodes[i] >= half) {
      const double d = u.values[i + 1] - u.values[i];
      const double h = op.mesh().spacing[i];
      const double um = 0.5 * (u.values[i] + u.values[i + 1]);
      s += d * d / h + h * um * um;
    }
  }
  return s;
}

}  // namespace obstacle
