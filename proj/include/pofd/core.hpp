#ifndef POFD_CORE_HPP
#define POFD_CORE_HPP

// Data model for partially observed functional samples on a shared
// equidistant grid.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pofd/errors.hpp"

namespace pofd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Value stored in missing cells and in undefined estimate cells. The
/// sample mask is authoritative, the sentinel only keeps stray reads loud.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double v) noexcept { return !std::isnan(v); }

/// Equidistant evaluation grid t_1 < ... < t_p.
class Grid {
 public:
  static constexpr double kEquidistanceTolerance = 1e-9;

  /// Validates strictly increasing, equidistant points with p >= 3.
  explicit Grid(std::vector<double> points) : points_(std::move(points)) {
    const std::size_t p = points_.size();
    if (p < 3) throw ArgumentError("grid needs at least 3 points, got " + std::to_string(p));
    for (std::size_t j = 1; j < p; ++j) {
      if (!(points_[j] > points_[j - 1]))
        throw ArgumentError("grid points must be strictly increasing (index " +
                            std::to_string(j) + ")");
    }
    const double range = points_.back() - points_.front();
    h_ = range / static_cast<double>(p - 1);
    for (std::size_t j = 0; j < p; ++j) {
      const double expected = points_.front() + range * static_cast<double>(j) / static_cast<double>(p - 1);
      if (std::abs(points_[j] - expected) > kEquidistanceTolerance * range)
        throw ArgumentError("grid points are not equidistant (index " + std::to_string(j) + ")");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  double spacing() const noexcept { return h_; }
  double operator[](std::size_t j) const noexcept { return points_[j]; }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  std::span<const double> points() const noexcept { return points_; }

  bool contains(double t) const noexcept {
    const double slack = kEquidistanceTolerance * (back() - front());
    return t >= front() - slack && t <= back() + slack;
  }

  /// Index of the grid point closest to t (ties go to the lower index).
  std::size_t nearest_index(double t) const {
    if (!contains(t)) throw ArgumentError("point " + std::to_string(t) + " outside the grid");
    const double pos = (t - front()) / h_;
    auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(size()) - 1);
    if (static_cast<std::size_t>(j) + 1 < size() && pos - static_cast<double>(j) > 0.5) ++j;
    return static_cast<std::size_t>(j);
  }

  friend bool operator==(const Grid& a, const Grid& b) { return a.points_ == b.points_; }

 private:
  std::vector<double> points_;
  double h_ = 0.0;
};

/// Equidistant grid of p points from a to b; t_1 = a and t_p = b exactly.
inline Grid make_grid(std::size_t p, double a, double b) {
  if (p < 3) throw ArgumentError("make_grid: p must be >= 3");
  if (!(a < b)) throw ArgumentError("make_grid: need a < b");
  std::vector<double> pts(p);
  for (std::size_t j = 0; j < p; ++j)
    pts[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(p - 1);
  pts.back() = b;
  return Grid(std::move(pts));
}

/// Contiguous index range [first, last] (inclusive).
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first + 1; }
  bool contains(std::size_t j) const noexcept { return j >= first && j <= last; }
};

/// n curves on a common grid; cell (i, j) is observed iff mask(i, j).
class FunctionalSample {
 public:
  FunctionalSample(Grid grid, Matrix values, Mask mask)
      : grid_(std::move(grid)), values_(std::move(values)), mask_(std::move(mask)) {
    const auto p = static_cast<Eigen::Index>(grid_.size());
    if (values_.cols() != p || mask_.cols() != p || mask_.rows() != values_.rows())
      throw ArgumentError("sample dimensions do not match the grid");
    if (values_.rows() == 0) throw ArgumentError("sample has no curves");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (!mask_.row(i).any())
        throw ArgumentError("curve " + std::to_string(i + 1) + " has no observed point");
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!mask_(i, j)) {
          values_(i, j) = kMissing;
        } else if (!std::isfinite(values_(i, j))) {
          throw ArgumentError("observed cell (" + std::to_string(i + 1) + ", " +
                              std::to_string(j + 1) + ") is not finite");
        }
      }
    }
  }

  /// Builds the mask from NaN cells of `values`.
  static FunctionalSample from_nan_matrix(Grid grid, Matrix values) {
    Mask mask = values.array().isNaN() == false;
    return FunctionalSample(std::move(grid), std::move(values), std::move(mask));
  }

  /// Same grid and mask, new values (missing cells are ignored).
  FunctionalSample with_values(Matrix values) const { return FunctionalSample(grid_, std::move(values), mask_); }

  const Grid& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }
  const Mask& mask() const noexcept { return mask_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t p() const noexcept { return grid_.size(); }

  bool observed(std::size_t i, std::size_t j) const {
    return mask_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double value(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Observed index range of curve i if the observed set is contiguous.
  std::optional<IndexRange> observed_range(std::size_t i) const {
    const auto row = mask_.row(static_cast<Eigen::Index>(i));
    std::size_t first = p(), last = 0;
    for (std::size_t j = 0; j < p(); ++j) {
      if (row(static_cast<Eigen::Index>(j))) {
        first = std::min(first, j);
        last = j;
      }
    }
    for (std::size_t j = first; j <= last; ++j)
      if (!row(static_cast<Eigen::Index>(j))) return std::nullopt;
    return IndexRange{first, last};
  }

  /// Mask as 0/1 doubles, handy for counting products.
  Matrix mask_matrix() const { return mask_.cast<double>().matrix(); }

  /// Values with missing cells replaced by zero.
  Matrix zero_filled() const { return mask_.select(values_.array(), 0.0).matrix(); }

  /// Sample restricted to the given curve indices.
  FunctionalSample select_curves(std::span<const std::size_t> rows) const {
    Matrix v(static_cast<Eigen::Index>(rows.size()), values_.cols());
    Mask m(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      v.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(rows[r]));
      m.row(static_cast<Eigen::Index>(r)) = mask_.row(static_cast<Eigen::Index>(rows[r]));
    }
    return FunctionalSample(grid_, std::move(v), std::move(m));
  }

 private:
  Grid grid_;
  Matrix values_;
  Mask mask_;
};

struct ObservationSummary {
  Vector p_hat;                          // observed fraction per grid point
  Vector d;                              // last observed grid point per curve
  std::vector<std::size_t> d_index;      // index of that point
  std::vector<std::size_t> d_f_candidates;  // grid indices with p_hat == 1
  bool interval_pattern = false;         // every row is 1,...,1,0,...,0
  std::optional<double> d_min;           // set iff interval_pattern
  std::optional<std::size_t> d_min_index;
};

inline ObservationSummary summarize_observation(const FunctionalSample& sample) {
  const std::size_t n = sample.n(), p = sample.p();
  ObservationSummary out;
  out.p_hat = sample.mask_matrix().colwise().sum().transpose() / static_cast<double>(n);
  out.d.resize(static_cast<Eigen::Index>(n));
  out.d_index.resize(n);
  out.interval_pattern = true;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t last = 0;
    bool seen_gap = false, row_ok = true;
    for (std::size_t j = 0; j < p; ++j) {
      if (sample.observed(i, j)) {
        last = j;
        if (seen_gap) row_ok = false;
      } else {
        seen_gap = true;
      }
    }
    if (!sample.observed(i, 0)) row_ok = false;
    out.interval_pattern = out.interval_pattern && row_ok;
    out.d_index[i] = last;
    out.d(static_cast<Eigen::Index>(i)) = sample.grid()[last];
  }
  for (std::size_t j = 0; j < p; ++j)
    if (out.p_hat(static_cast<Eigen::Index>(j)) == 1.0) out.d_f_candidates.push_back(j);
  if (out.interval_pattern) {
    const auto it = std::min_element(out.d_index.begin(), out.d_index.end());
    out.d_min_index = *it;
    out.d_min = sample.grid()[*it];
  }
  return out;
}

}  // namespace pofd

#endif  // POFD_CORE_HPP
