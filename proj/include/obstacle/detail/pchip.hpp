// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes)
// with exact evaluation of value, derivative and antiderivative.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "obstacle/errors.hpp"

namespace obstacle::detail {

class Pchip {
 public:
  Pchip() = default;

  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw Error("pchip: need at least two samples");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i])) throw Error("pchip: abscissae must be strictly increasing");
    slopes_ = fritsch_carlson(x_, y_);
    build_cumulative_integral();
  }

  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }

  /// Interpolated value; linear extrapolation with the boundary slope outside.
  double value(double t) const {
    if (t <= x_.front()) return y_.front() + slopes_.front() * (t - x_.front());
    if (t >= x_.back()) return y_.back() + slopes_.back() * (t - x_.back());
    const std::size_t i = cell(t);
    const double s = t - x_[i];
    return y_[i] + s * (b_[i] + s * (c_[i] + s * d_[i]));
  }

  double derivative(double t) const {
    if (t <= x_.front()) return slopes_.front();
    if (t >= x_.back()) return slopes_.back();
    const std::size_t i = cell(t);
    const double s = t - x_[i];
    return b_[i] + s * (2.0 * c_[i] + s * 3.0 * d_[i]);
  }

  /// Antiderivative with value 0 at the first knot.
  double antiderivative(double t) const {
    if (t <= x_.front()) {
      const double s = t - x_.front();
      return y_.front() * s + 0.5 * slopes_.front() * s * s;
    }
    if (t >= x_.back()) {
      const double s = t - x_.back();
      return int_[x_.size() - 1] + y_.back() * s + 0.5 * slopes_.back() * s * s;
    }
    const std::size_t i = cell(t);
    const double s = t - x_[i];
    return int_[i] + s * (y_[i] + s * (b_[i] / 2 + s * (c_[i] / 3 + s * d_[i] / 4)));
  }

 private:
  std::size_t cell(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
  }

  static std::vector<double> fritsch_carlson(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        m[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // limit boundary slopes to preserve monotone shape
    for (std::size_t i : {std::size_t{0}, n - 1}) {
      const double d0 = (i == 0) ? delta[0] : delta[n - 2];
      if (m[i] * d0 <= 0.0)
        m[i] = 0.0;
      else if (std::abs(m[i]) > 3.0 * std::abs(d0))
        m[i] = 3.0 * d0;
    }
    return m;
  }

  void build_cumulative_integral() {
    const std::size_t n = x_.size();
    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    int_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x_[i + 1] - x_[i];
      const double dl = (y_[i + 1] - y_[i]) / h;
      b_[i] = slopes_[i];
      c_[i] = (3.0 * dl - 2.0 * slopes_[i] - slopes_[i + 1]) / h;
      d_[i] = (slopes_[i] + slopes_[i + 1] - 2.0 * dl) / (h * h);
      const double cellint =
          h * (y_[i] + h * (b_[i] / 2 + h * (c_[i] / 3 + h * d_[i] / 4)));
      int_[i + 1] = int_[i] + cellint;
    }
  }

  std::vector<double> x_, y_, slopes_;
  std::vector<double> b_, c_, d_;  // local cubic coefficients per cell
  std::vector<double> int_;        // cumulative integral at knots
};

}  // namespace obstacle::detail
