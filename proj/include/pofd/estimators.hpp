#ifndef POFD_ESTIMATORS_HPP
#define POFD_ESTIMATORS_HPP

// Classical (observed-subset) and FTC mean/covariance estimators.
//
// Undefined cells (no curve observed, 0/0) are stored as NaN. The FTC
// estimators integrate derivative estimates outwards from an anchor grid
// point at which every curve is observed.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "pofd/calculus.hpp"
#include "pofd/core.hpp"

namespace pofd {

struct MeanEstimate {
  Grid grid;
  Vector values;  // NaN where undefined
  int order = 0;  // derivative order
  std::optional<std::size_t> anchor_index;
  double anchor_shift = 0.0;  // snapped grid anchor minus requested anchor

  bool defined(std::size_t j) const { return is_defined(values(static_cast<Eigen::Index>(j))); }
};

struct CovEstimate {
  Grid grid;
  Matrix values;  // NaN where undefined
  int order_s = 0;
  int order_t = 0;
  std::optional<std::size_t> anchor_index;
  double anchor_shift = 0.0;

  bool defined(std::size_t j, std::size_t k) const {
    return is_defined(values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
  }
};

namespace detail {

inline Vector divide_or_undefined(const Vector& num, const Vector& den) {
  Vector out(num.size());
  for (Eigen::Index j = 0; j < num.size(); ++j) out(j) = den(j) > 0.0 ? num(j) / den(j) : kMissing;
  return out;
}

inline Matrix divide_or_undefined(const Matrix& num, const Matrix& den) {
  return (den.array() > 0.0).select(num.array() / den.array(), kMissing).matrix();
}

/// A^T B, exactly symmetric when `symmetric` (A == B).
inline Matrix cross_product(const Matrix& a, const Matrix& b, bool symmetric) {
  if (!symmetric) return a.transpose() * b;
  Matrix out = Matrix::Zero(a.cols(), a.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  return out.selfadjointView<Eigen::Lower>();
}

/// Observed cells of order-k derivatives centered by the order-k mean,
/// missing cells zero.
inline Matrix centered(const FunctionalSample& s, const Vector& mean) {
  Matrix c = s.zero_filled();
  c.rowwise() -= mean.transpose();
  return s.mask().select(c.array(), 0.0).matrix();
}

inline void require_fully_observed(const FunctionalSample& s, std::size_t j, const char* who) {
  if (!s.mask().col(static_cast<Eigen::Index>(j)).all())
    throw ArgumentError(std::string(who) + ": not every curve is observed at the anchor t = " +
                        std::to_string(s.grid()[j]));
}

/// Every curve observed on a contiguous interval with at least `min_points`
/// points that contains the anchor.
inline void require_anchor_intervals(const FunctionalSample& s, std::size_t anchor, std::size_t min_points,
                                     const char* who) {
  require_fully_observed(s, anchor, who);
  for (std::size_t i = 0; i < s.n(); ++i) {
    const auto r = s.observed_range(i);
    if (!r) throw ArgumentError(std::string(who) + ": curve " + std::to_string(i + 1) + " is not observed on an interval");
    if (r->size() < min_points)
      throw ArgumentError(std::string(who) + ": curve " + std::to_string(i + 1) + " has only " +
                          std::to_string(r->size()) + " observed points, need " + std::to_string(min_points));
  }
}

inline std::size_t interval_anchor(const FunctionalSample& s, const char* who) {
  const auto summary = summarize_observation(s);
  if (!summary.interval_pattern)
    throw PreconditionError(std::string(who) +
                            ": observation pattern is not of interval form [t_1, d_i]; use the generalized "
                            "estimator with an explicit anchor d_f");
  return *summary.d_min_index;
}

/// Adds v(t) to every row.
inline Matrix add_to_rows(Matrix m, const Vector& v) {
  m.rowwise() += v.transpose();
  return m;
}

/// Adds v(s) to every column.
inline Matrix add_to_cols(Matrix m, const Vector& v) {
  m.colwise() += v;
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Classical estimators

/// Observed-subset mean of the order-k derivative curves.
inline MeanEstimate mean_est(const SampleDerivatives& d, int k) {
  const FunctionalSample& s = d.order(k);
  const Vector counts = s.mask_matrix().colwise().sum().transpose();
  const Vector sums = s.zero_filled().colwise().sum().transpose();
  return MeanEstimate{s.grid(), detail::divide_or_undefined(sums, counts), k, std::nullopt, 0.0};
}

inline MeanEstimate mean_est(const FunctionalSample& sample, int k) {
  return mean_est(SampleDerivatives(sample, k), k);
}

/// Pairwise-complete covariance of order-(l, k) derivatives, divisor equal
/// to the number of curves observed at both points.
inline CovEstimate cov_est(const SampleDerivatives& d, int l, int k) {
  const FunctionalSample& sl = d.order(l);
  const FunctionalSample& sk = d.order(k);
  const Matrix cl = detail::centered(sl, mean_est(d, l).values);
  const bool same = (l == k);
  const Matrix ck = same ? cl : detail::centered(sk, mean_est(d, k).values);
  const Matrix ml = sl.mask_matrix();
  const Matrix num = detail::cross_product(cl, ck, same);
  // The masks of all orders coincide, so U_i(s,t) counts are symmetric.
  const Matrix counts = detail::cross_product(ml, ml, true);
  return CovEstimate{sl.grid(), detail::divide_or_undefined(num, counts), l, k, std::nullopt, 0.0};
}

inline CovEstimate cov_est(const FunctionalSample& sample, int l, int k) {
  return cov_est(SampleDerivatives(sample, std::max(l, k)), l, k);
}

// ---------------------------------------------------------------------------
// FTC estimators for interval observation patterns [t_1, d_i]

/// Classical mean on [t_1, d_min]; beyond d_min the integrated derivative
/// mean plus the classical mean at d_min.
inline MeanEstimate ftc_mean(const SampleDerivatives& d) {
  const std::size_t a = detail::interval_anchor(d.base(), "ftc_mean");
  const Vector mu = mean_est(d, 0).values;
  const Vector integral = cum_int(mean_est(d, 1).values, d.grid(), a);
  Vector out = mu;
  const auto ai = static_cast<Eigen::Index>(a);
  for (Eigen::Index j = ai + 1; j < out.size(); ++j) out(j) = integral(j) + mu(ai);
  return MeanEstimate{d.grid(), std::move(out), 0, a, 0.0};
}

inline MeanEstimate ftc_mean(const FunctionalSample& sample) { return ftc_mean(SampleDerivatives(sample, 1)); }

/// Four-case FTC covariance around (d_min, d_min).
inline CovEstimate ftc_cov(const SampleDerivatives& d) {
  const std::size_t a = detail::interval_anchor(d.base(), "ftc_cov");
  const Grid& g = d.grid();
  const Matrix c00 = cov_est(d, 0, 0).values;
  const Matrix c10 = cov_est(d, 1, 0).values;
  const Matrix c01 = c10.transpose();
  const Matrix c11 = cov_est(d, 1, 1).values;
  const auto ai = static_cast<Eigen::Index>(a);
  const Eigen::Index p = c00.rows();

  const Matrix i01 = cum_int_cols(c01, g, a);  // int_{d_min}^t sigma01(s, z) dz
  const Matrix i10 = cum_int_rows(c10, g, a);  // int_{d_min}^s sigma10(z, t) dz
  const Matrix i11 = cum_int_rows(cum_int_cols(c11, g, a), g, a);

  Matrix out(p, p);
  for (Eigen::Index s = 0; s < p; ++s) {
    for (Eigen::Index t = 0; t < p; ++t) {
      if (s <= ai && t <= ai)
        out(s, t) = c00(s, t);
      else if (s <= ai)
        out(s, t) = i01(s, t) + c00(s, ai);
      else if (t <= ai)
        out(s, t) = i10(s, t) + c00(ai, t);
      else
        out(s, t) = i11(s, t) + i10(s, ai) + i01(ai, t) + c00(ai, ai);
    }
  }
  return CovEstimate{g, std::move(out), 0, 0, a, 0.0};
}

inline CovEstimate ftc_cov(const FunctionalSample& sample) { return ftc_cov(SampleDerivatives(sample, 1)); }

// ---------------------------------------------------------------------------
// Back-transformation from an arbitrary fully observed anchor d_f

namespace detail {

struct Anchor {
  std::size_t index;
  double shift;
};

inline Anchor snap_anchor(const Grid& g, double d_f) {
  const std::size_t j = g.nearest_index(d_f);
  return Anchor{j, g[j] - d_f};
}

}  // namespace detail

/// Repeated FTC back-transformation of the order-K derivative mean, with
/// classical derivative means at d_f as integration constants.
inline MeanEstimate ftc_mean_recursive(const SampleDerivatives& d, int K, double d_f) {
  if (K < 1) throw ArgumentError("ftc_mean_recursive: K must be >= 1");
  if (K > d.max_order()) throw ArgumentError("ftc_mean_recursive: derivatives of order K not available");
  const auto anchor = detail::snap_anchor(d.grid(), d_f);
  detail::require_anchor_intervals(d.base(), anchor.index, static_cast<std::size_t>(K) + 2, "ftc_mean_recursive");
  const auto a = static_cast<Eigen::Index>(anchor.index);
  Vector level = mean_est(d, K).values;
  for (int k = K - 1; k >= 0; --k) {
    const double boundary = mean_est(d, k).values(a);
    level = cum_int(level, d.grid(), anchor.index).array() + boundary;
  }
  return MeanEstimate{d.grid(), std::move(level), 0, anchor.index, anchor.shift};
}

inline MeanEstimate ftc_mean_recursive(const FunctionalSample& sample, int K, double d_f) {
  return ftc_mean_recursive(SampleDerivatives(sample, K), K, d_f);
}

/// Signed FTC integral of the derivative mean around d_f.
inline MeanEstimate ftc_mean_general(const SampleDerivatives& d, double d_f) {
  return ftc_mean_recursive(d, 1, d_f);
}

inline MeanEstimate ftc_mean_general(const FunctionalSample& sample, double d_f) {
  return ftc_mean_general(SampleDerivatives(sample, 1), d_f);
}

/// Four-term FTC covariance with signed integrals in every quadrant around
/// (d_f, d_f).
inline CovEstimate ftc_cov_general(const SampleDerivatives& d, double d_f) {
  const auto anchor = detail::snap_anchor(d.grid(), d_f);
  detail::require_anchor_intervals(d.base(), anchor.index, 3, "ftc_cov_general");
  const Grid& g = d.grid();
  const std::size_t a = anchor.index;
  const auto ai = static_cast<Eigen::Index>(a);
  const Matrix c00 = cov_est(d, 0, 0).values;
  const Matrix c10 = cov_est(d, 1, 0).values;
  const Matrix c11 = cov_est(d, 1, 1).values;

  // int_{d_f}^s sigma10(z, d_f) dz; the t-direction term is the same curve
  // because sigma01(d_f, z) = sigma10(z, d_f).
  const Vector boundary = cum_int(Vector(c10.col(ai)), g, a);
  Matrix out = cum_int_rows(cum_int_cols(c11, g, a), g, a);
  out.colwise() += boundary;
  out.rowwise() += boundary.transpose();
  out.array() += c00(ai, ai);
  return CovEstimate{g, std::move(out), 0, 0, a, anchor.shift};
}

inline CovEstimate ftc_cov_general(const FunctionalSample& sample, double d_f) {
  return ftc_cov_general(SampleDerivatives(sample, 1), d_f);
}

namespace detail {

// Builds estimates G_{l,k} of sigma^(l,k) under dependence confined to the
// first K monomial components. Classical estimates are used directly only
// where they remain consistent: both orders >= K, or an order < K evaluated
// at the fully observed anchor. Everything else is integrated back from
// higher orders, along boundary lines through the anchor as well.
class CovBackTransform {
 public:
  CovBackTransform(const SampleDerivatives& d, int K, std::size_t anchor) : d_(d), K_(K), a_(anchor) {}

  Matrix full(int l, int k) {
    if (l >= K_ && k >= K_) return classical(l, k);
    if (l < K_) return add_to_rows(cum_int_rows(full(l + 1, k), d_.grid(), a_), line_t(l, k));
    return add_to_cols(cum_int_cols(full(l, k + 1), d_.grid(), a_), line_s(l, k));
  }

 private:
  // G_{l,k}(d_f, t) as a function of t.
  Vector line_t(int l, int k) {
    if (k >= K_) return classical(l, k).row(idx());
    return cum_int(line_t(l, k + 1), d_.grid(), a_).array() + classical(l, k)(idx(), idx());
  }

  // G_{l,k}(s, d_f) as a function of s.
  Vector line_s(int l, int k) {
    if (l >= K_) return classical(l, k).col(idx());
    return cum_int(line_s(l + 1, k), d_.grid(), a_).array() + classical(l, k)(idx(), idx());
  }

  const Matrix& classical(int l, int k) {
    auto it = cache_.find({l, k});
    if (it == cache_.end()) it = cache_.emplace(std::pair{l, k}, cov_est(d_, l, k).values).first;
    return it->second;
  }

  Eigen::Index idx() const { return static_cast<Eigen::Index>(a_); }

  const SampleDerivatives& d_;
  int K_;
  std::size_t a_;
  std::map<std::pair<int, int>, Matrix> cache_;
};

}  // namespace detail

/// Covariance counterpart of ftc_mean_recursive.
inline CovEstimate ftc_cov_recursive(const SampleDerivatives& d, int K, double d_f) {
  if (K < 1) throw ArgumentError("ftc_cov_recursive: K must be >= 1");
  if (K > d.max_order()) throw ArgumentError("ftc_cov_recursive: derivatives of order K not available");
  const auto anchor = detail::snap_anchor(d.grid(), d_f);
  detail::require_anchor_intervals(d.base(), anchor.index, static_cast<std::size_t>(K) + 2, "ftc_cov_recursive");
  detail::CovBackTransform bt(d, K, anchor.index);
  return CovEstimate{d.grid(), bt.full(0, 0), 0, 0, anchor.index, anchor.shift};
}

inline CovEstimate ftc_cov_recursive(const FunctionalSample& sample, int K, double d_f) {
  return ftc_cov_recursive(SampleDerivatives(sample, K), K, d_f);
}

// ---------------------------------------------------------------------------
// Functional principal components on a fully observed subdomain

struct FpcaResult {
  Matrix scores;          // n x r
  Vector explained;       // r fractions, non-increasing
  Vector eigenvalues;     // r eigenvalues of the integral operator
  Matrix eigenfunctions;  // points x r, L2-normalised on the subdomain
  IndexRange subdomain;
};

inline FpcaResult fpca_scores(const FunctionalSample& sample, IndexRange sub) {
  if (sub.last >= sample.p() || sub.first > sub.last) throw ArgumentError("fpca_scores: invalid subdomain");
  const auto first = static_cast<Eigen::Index>(sub.first);
  const auto m = static_cast<Eigen::Index>(sub.size());
  if (!sample.mask().middleCols(first, m).all())
    throw ArgumentError("fpca_scores: subdomain is not fully observed");
  const double h = sample.grid().spacing();
  const Matrix x = sample.values().middleCols(first, m);
  const Vector mu = x.colwise().mean().transpose();
  Matrix xc = x;
  xc.rowwise() -= mu.transpose();
  Matrix cov = detail::cross_product(xc, xc, true) / static_cast<double>(sample.n());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(h * cov);
  if (eig.info() != Eigen::Success) throw NumericalError("fpca_scores: eigendecomposition failed");
  const Vector ev = eig.eigenvalues().reverse();
  Matrix vecs = eig.eigenvectors().rowwise().reverse();
  const double top = ev.size() ? std::max(ev(0), 0.0) : 0.0;
  Eigen::Index r = 0;
  while (r < ev.size() && ev(r) > 1e-12 * top) ++r;

  FpcaResult out;
  out.subdomain = sub;
  out.eigenvalues = ev.head(r);
  out.explained = out.eigenvalues / out.eigenvalues.sum();
  out.eigenfunctions.resize(m, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    Vector v = vecs.col(c);
    if (v.sum() < 0.0) v = -v;
    out.eigenfunctions.col(c) = v / std::sqrt(h);
  }
  out.scores = h * xc * out.eigenfunctions;
  return out;
}

}  // namespace pofd

#endif  // POFD_ESTIMATORS_HPP
