#ifndef POFD_CALCULUS_HPP
#define POFD_CALCULUS_HPP

// Finite-difference derivatives and trapezoidal quadrature on the grid.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pofd/core.hpp"

namespace pofd {

/// Second-order finite differences of every curve over its observed
/// interval: central stencils inside, 3-point one-sided stencils at both ends.
/// The mask is preserved.
inline FunctionalSample differentiate(const FunctionalSample& sample) {
  const double h = sample.grid().spacing();
  Matrix out = Matrix::Constant(static_cast<Eigen::Index>(sample.n()),
                                static_cast<Eigen::Index>(sample.p()), kMissing);
  const Matrix& x = sample.values();
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const auto range = sample.observed_range(i);
    if (!range)
      throw ArgumentError("differentiate: curve " + std::to_string(i + 1) +
                          " has a non-contiguous observed set");
    if (range->size() < 3)
      throw ArgumentError("differentiate: curve " + std::to_string(i + 1) +
                          " has fewer than 3 observed points");
    const auto r = static_cast<Eigen::Index>(i);
    const auto a = static_cast<Eigen::Index>(range->first);
    const auto b = static_cast<Eigen::Index>(range->last);
    out(r, a) = (-3.0 * x(r, a) + 4.0 * x(r, a + 1) - x(r, a + 2)) / (2.0 * h);
    for (Eigen::Index j = a + 1; j < b; ++j) out(r, j) = (x(r, j + 1) - x(r, j - 1)) / (2.0 * h);
    out(r, b) = (3.0 * x(r, b) - 4.0 * x(r, b - 1) + x(r, b - 2)) / (2.0 * h);
  }
  return sample.with_values(std::move(out));
}

/// Signed cumulative trapezoid integral F(t_j) = int_{t_anchor}^{t_j} f.
/// Integration proceeds outwards from the anchor and stops at the first
/// undefined cell in each direction; cells beyond stay undefined.
inline Vector cum_int(const Vector& values, const Grid& grid, std::size_t anchor) {
  const auto p = static_cast<Eigen::Index>(grid.size());
  if (values.size() != p) throw ArgumentError("cum_int: length does not match the grid");
  if (anchor >= grid.size()) throw ArgumentError("cum_int: anchor outside the grid");
  const auto a = static_cast<Eigen::Index>(anchor);
  if (!is_defined(values(a))) throw ArgumentError("cum_int: anchor cell is undefined");
  const double half_h = 0.5 * grid.spacing();
  Vector out = Vector::Constant(p, kMissing);
  out(a) = 0.0;
  for (Eigen::Index j = a + 1; j < p && is_defined(values(j)); ++j)
    out(j) = out(j - 1) + half_h * (values(j - 1) + values(j));
  for (Eigen::Index j = a - 1; j >= 0 && is_defined(values(j)); --j)
    out(j) = out(j + 1) - half_h * (values(j) + values(j + 1));
  return out;
}

/// cum_int applied along the first index (s) of every column.
inline Matrix cum_int_rows(const Matrix& m, const Grid& grid, std::size_t anchor) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Vector col = m.col(c);
    if (is_defined(col(static_cast<Eigen::Index>(anchor))))
      out.col(c) = cum_int(col, grid, anchor);
    else
      out.col(c).setConstant(kMissing);
  }
  return out;
}

/// cum_int applied along the second index (t) of every row.
inline Matrix cum_int_cols(const Matrix& m, const Grid& grid, std::size_t anchor) {
  return cum_int_rows(m.transpose(), grid, anchor).transpose();
}

/// Composite trapezoid weights over the whole grid.
inline Vector trapezoid_weights(const Grid& grid) {
  Vector w = Vector::Constant(static_cast<Eigen::Index>(grid.size()), grid.spacing());
  w(0) *= 0.5;
  w(w.size() - 1) *= 0.5;
  return w;
}

/// Trapezoid integral over the grid. Undefined cells are not allowed.
inline double integrate(const Vector& values, const Grid& grid) {
  return trapezoid_weights(grid).dot(values);
}

/// Tensor-product trapezoid integral over the grid square.
inline double integrate2d(const Matrix& values, const Grid& grid) {
  const Vector w = trapezoid_weights(grid);
  return w.dot(values * w);
}

/// A sample together with its derivative samples up to some order. Orders
/// not supplied by the caller are computed with `differentiate`.
class SampleDerivatives {
 public:
  SampleDerivatives(FunctionalSample sample, int max_order) { build(std::move(sample), {}, max_order); }

  /// `supplied[k-1]` is the k-th derivative sample; it must share the grid
  /// and the mask of `sample`.
  SampleDerivatives(FunctionalSample sample, std::vector<FunctionalSample> supplied, int max_order) {
    for (const auto& d : supplied) {
      if (!(d.grid() == sample.grid()) || d.n() != sample.n() || !(d.mask() == sample.mask()).all())
        throw ArgumentError("supplied derivative sample does not match the base sample");
    }
    build(std::move(sample), std::move(supplied), max_order);
  }

  int max_order() const noexcept { return static_cast<int>(orders_.size()) - 1; }
  const FunctionalSample& order(int k) const {
    if (k < 0 || k > max_order()) throw ArgumentError("derivative order " + std::to_string(k) + " not available");
    return orders_[static_cast<std::size_t>(k)];
  }
  const FunctionalSample& base() const noexcept { return orders_.front(); }
  const Grid& grid() const noexcept { return orders_.front().grid(); }

 private:
  void build(FunctionalSample sample, std::vector<FunctionalSample> supplied, int max_order) {
    if (max_order < 0) throw ArgumentError("negative derivative order");
    orders_.push_back(std::move(sample));
    for (int k = 1; k <= max_order; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      if (idx < supplied.size())
        orders_.push_back(std::move(supplied[idx]));
      else
        orders_.push_back(differentiate(orders_.back()));
    }
  }

  std::vector<FunctionalSample> orders_;
};

}  // namespace pofd

#endif  // POFD_CALCULUS_HPP
