#ifndef POFD_BASIS_HPP
#define POFD_BASIS_HPP

// Fourier basis evaluation, least-squares projection on a fully observed
// subdomain, and BIC-based choice of the number of basis functions.

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pofd/core.hpp"

namespace pofd {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Fourier system psi_1 = 1, psi_2k = sqrt2 sin(2 pi k u), psi_2k+1 = sqrt2
/// cos(2 pi k u) with u the point rescaled from `domain` to [0, 1].
struct BasisSpec {
  std::size_t J = 5;
  Interval domain{};

  BasisSpec(std::size_t j, Interval dom) : J(j), domain(dom) {
    if (J < 3 || J % 2 == 0) throw ArgumentError("basis size J must be odd and >= 3, got " + std::to_string(J));
    if (!(domain.lo < domain.hi)) throw ArgumentError("basis domain must satisfy lo < hi");
  }
};

inline Matrix eval_basis(const BasisSpec& spec, std::span<const double> points) {
  const double width = spec.domain.hi - spec.domain.lo;
  const double slack = 1e-9 * width;
  const auto len = static_cast<Eigen::Index>(points.size());
  Matrix out(len, static_cast<Eigen::Index>(spec.J));
  for (Eigen::Index r = 0; r < len; ++r) {
    const double t = points[static_cast<std::size_t>(r)];
    if (t < spec.domain.lo - slack || t > spec.domain.hi + slack)
      throw ArgumentError("eval_basis: point " + std::to_string(t) + " outside the basis domain");
    const double u = (t - spec.domain.lo) / width;
    out(r, 0) = 1.0;
    for (std::size_t k = 1; 2 * k < spec.J; ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(k) * u;
      out(r, static_cast<Eigen::Index>(2 * k - 1)) = std::numbers::sqrt2 * std::sin(arg);
      out(r, static_cast<Eigen::Index>(2 * k)) = std::numbers::sqrt2 * std::cos(arg);
    }
  }
  return out;
}

struct BasisProjection {
  Matrix coefficients;  // n x J
  std::size_t J = 0;
  IndexRange subdomain;
  Interval subdomain_points;  // [t_first, t_last]
};

namespace detail {

/// Householder QR of the J_max-column design over a subdomain, applied to all
/// curves at once. Fourier columns are nested, so the leading J columns of
/// the factorisation are the factorisation for basis size J.
class SubdomainDesign {
 public:
  SubdomainDesign(const FunctionalSample& sample, IndexRange sub, const BasisSpec& spec) : sub_(sub) {
    if (sub.last >= sample.p() || sub.first > sub.last) throw ArgumentError("invalid projection subdomain");
    const auto first = static_cast<Eigen::Index>(sub.first);
    const auto m = static_cast<Eigen::Index>(sub.size());
    if (!sample.mask().middleCols(first, m).all())
      throw ArgumentError("projection subdomain is not fully observed by every curve");
    if (static_cast<std::size_t>(m) < spec.J)
      throw NumericalError("rank-deficient design: " + std::to_string(m) + " subdomain points for J = " +
                           std::to_string(spec.J) + " basis functions");
    const auto pts = sample.grid().points().subspan(sub.first, sub.size());
    qr_.compute(eval_basis(spec, pts));
    qty_ = qr_.householderQ().transpose() * sample.values().middleCols(first, m).transpose();
    const Matrix r = qr_.matrixQR().topRows(static_cast<Eigen::Index>(spec.J)).triangularView<Eigen::Upper>();
    rdiag_ = r.diagonal().cwiseAbs();
  }

  std::size_t points() const noexcept { return sub_.size(); }
  std::size_t max_j() const noexcept { return static_cast<std::size_t>(rdiag_.size()); }

  /// Residual sum of squares per curve for the leading J columns.
  Vector rss(std::size_t J) const {
    const auto j = static_cast<Eigen::Index>(J);
    return qty_.bottomRows(qty_.rows() - j).colwise().squaredNorm().transpose();
  }

  Vector total_ss() const { return qty_.colwise().squaredNorm().transpose(); }

  /// n x J least-squares coefficients.
  Matrix coefficients(std::size_t J) const {
    const auto j = static_cast<Eigen::Index>(J);
    const double top = rdiag_.head(j).maxCoeff();
    for (Eigen::Index c = 0; c < j; ++c) {
      if (!(rdiag_(c) > 1e-10 * top))
        throw NumericalError("rank-deficient design: basis column " + std::to_string(c + 1) +
                             " is numerically dependent on the previous ones over the subdomain (|R_jj| = " +
                             std::to_string(rdiag_(c)) + ")");
    }
    const Matrix r = qr_.matrixQR().topLeftCorner(j, j);
    const Matrix sol = r.triangularView<Eigen::Upper>().solve(qty_.topRows(j));
    return sol.transpose();
  }

 private:
  IndexRange sub_;
  Eigen::HouseholderQR<Matrix> qr_;
  Matrix qty_;  // m x n
  Vector rdiag_;
};

}  // namespace detail

/// Least-squares coefficients of every curve restricted to `sub`.
inline BasisProjection project(const FunctionalSample& sample, const BasisSpec& spec, IndexRange sub) {
  const detail::SubdomainDesign design(sample, sub, spec);
  return BasisProjection{design.coefficients(spec.J), spec.J, sub,
                         Interval{sample.grid()[sub.first], sample.grid()[sub.last]}};
}

/// Grid indices covering [lo, hi] (snapped to the nearest grid points).
inline IndexRange subdomain_indices(const Grid& grid, Interval iv) {
  const std::size_t a = grid.nearest_index(iv.lo), b = grid.nearest_index(iv.hi);
  if (a > b) throw ArgumentError("empty subdomain");
  return IndexRange{a, b};
}

struct BicSelection {
  std::size_t J = 3;                   // median rule result
  std::vector<std::size_t> per_curve;  // J^BIC_i
};

/// Per-curve BIC m log(RSS/m) + J log(m) over J = 3, 5, ..., J_max, then the
/// lower median snapped down to an odd value >= 3. The basis lives on
/// `domain`; curves are fitted on the subdomain points only.
inline BicSelection select_J_detailed(const FunctionalSample& sample, IndexRange sub, std::size_t j_max,
                                      Interval domain) {
  if (j_max < 3 || j_max % 2 == 0) throw ArgumentError("J_max must be odd and >= 3");
  const std::size_t m = sub.size();
  std::size_t top = j_max;
  while (top >= 3 && top > m - 1) top -= 2;
  if (top < 3) throw NumericalError("subdomain has too few points for J = 3");
  const detail::SubdomainDesign design(sample, sub, BasisSpec(top, domain));
  const double md = static_cast<double>(m);
  // Residuals at round-off level are indistinguishable; flooring them makes
  // the penalty decide among exact fits.
  const Vector floor = design.total_ss() * 1e-26 + Vector::Constant(static_cast<Eigen::Index>(sample.n()), 1e-300);

  BicSelection out;
  out.per_curve.assign(sample.n(), 3);
  Vector best = Vector::Constant(static_cast<Eigen::Index>(sample.n()), std::numeric_limits<double>::infinity());
  for (std::size_t J = 3; J <= top; J += 2) {
    const Vector rss = design.rss(J).cwiseMax(floor);
    for (Eigen::Index i = 0; i < rss.size(); ++i) {
      const double bic = md * std::log(rss(i) / md) + static_cast<double>(J) * std::log(md);
      if (bic < best(i)) {
        best(i) = bic;
        out.per_curve[static_cast<std::size_t>(i)] = J;
      }
    }
  }
  std::vector<std::size_t> sorted = out.per_curve;
  std::sort(sorted.begin(), sorted.end());
  std::size_t med = sorted[(sorted.size() - 1) / 2];
  if (med % 2 == 0) --med;
  out.J = std::max<std::size_t>(med, 3);
  return out;
}

inline std::size_t select_J(const FunctionalSample& sample, IndexRange sub, std::size_t j_max, Interval domain) {
  return select_J_detailed(sample, sub, j_max, domain).J;
}

/// Basis on the full grid range.
inline std::size_t select_J(const FunctionalSample& sample, IndexRange sub, std::size_t j_max) {
  return select_J(sample, sub, j_max, Interval{sample.grid().front(), sample.grid().back()});
}

}  // namespace pofd

#endif  // POFD_BASIS_HPP
