// Symmetric tridiagonal factorizations with a pinned-row mask. Pinned rows
// behave as identity equations, which is how Dirichlet nodes and active
// (contact) nodes are eliminated without reindexing.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "obstacle/errors.hpp"

namespace obstacle::detail {

/// LDL^T factorization of a symmetric tridiagonal matrix where rows with
/// free[i] == false are replaced by the identity. No pivoting; callers pass
/// SPD matrices (the lambda-norm operator) or guard the pivots themselves.
class TridiagLDL {
 public:
  TridiagLDL() = default;

  TridiagLDL(const std::vector<double>& diag, const std::vector<double>& off,
             const std::vector<char>& free_mask, double pivot_floor = 0.0) {
    factor(diag, off, free_mask, pivot_floor);
  }

  void factor(const std::vector<double>& diag, const std::vector<double>& off,
              const std::vector<char>& free_mask, double pivot_floor = 0.0) {
    const std::size_t n = diag.size();
    d_.assign(n, 1.0);
    l_.assign(n > 0 ? n - 1 : 0, 0.0);
    free_ = free_mask;
    for (std::size_t i = 0; i < n; ++i) {
      if (!free_[i]) continue;
      double di = diag[i];
      if (i > 0 && free_[i - 1]) di -= l_[i - 1] * l_[i - 1] * d_[i - 1];
      if (std::abs(di) <= pivot_floor)
        throw JacobianSingular("tridiagonal pivot underflow at row " + std::to_string(i));
      d_[i] = di;
      if (i + 1 < n && free_[i + 1]) l_[i] = off[i] / di;
    }
  }

  /// Solve A x = b; entries of b at pinned rows pass through unchanged.
  std::vector<double> solve(const std::vector<double>& b) const {
    const std::size_t n = d_.size();
    std::vector<double> x(b);
    for (std::size_t i = 1; i < n; ++i)
      if (free_[i] && free_[i - 1]) x[i] -= l_[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i)
      if (free_[i]) x[i] /= d_[i];
    for (std::size_t i = n - 1; i-- > 0;)
      if (free_[i] && free_[i + 1]) x[i] -= l_[i] * x[i + 1];
    return x;
  }

  bool positive_definite() const {
    for (std::size_t i = 0; i < d_.size(); ++i)
      if (free_[i] && d_[i] <= 0.0) return false;
    return true;
  }

 private:
  std::vector<double> d_, l_;
  std::vector<char> free_;
};

/// y = A x for a symmetric tridiagonal matrix given by (diag, off).
inline std::vector<double> tridiag_apply(const std::vector<double>& diag,
                                         const std::vector<double>& off,
                                         const std::vector<double>& x) {
  const std::size_t n = diag.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += off[i - 1] * x[i - 1];
    if (i + 1 < n) v += off[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

}  // namespace obstacle::detail
