#ifndef POFD_TESTS_HELPERS_HPP
#define POFD_TESTS_HELPERS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "pofd/pofd.hpp"

namespace pofd::test_util {

/// Fully observed sample with curve i given by f(i, t).
inline FunctionalSample full_sample(const Grid& g, std::size_t n, const std::function<double(std::size_t, double)>& f) {
  Matrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g.size(); ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(i, g[j]);
  Mask m = Mask::Constant(v.rows(), v.cols(), true);
  return FunctionalSample(g, std::move(v), std::move(m));
}

/// Dep.-Dis. style sample rendered on a grid with every curve observed.
inline FunctionalSample full_dgp_sample(std::size_t n, std::size_t p, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.seed = seed;
  const DgpDraw draw = draw_sample(cfg);
  return FunctionalSample::from_nan_matrix(draw.sample.grid(), draw.xi * dgp_basis(cfg.kind, draw.sample.grid().points()).transpose());
}

/// Same values with curve i observed on grid indices [0, last[i]].
inline FunctionalSample truncate(const FunctionalSample& s, const std::vector<std::size_t>& last) {
  Mask m = s.mask();
  for (std::size_t i = 0; i < s.n(); ++i)
    for (std::size_t j = last[i] + 1; j < s.p(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = false;
  Matrix v = s.values();
  return FunctionalSample(s.grid(), std::move(v), std::move(m));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace pofd::test_util

#endif  // POFD_TESTS_HELPERS_HPP
