#ifndef POFD_DGP_HPP
#define POFD_DGP_HPP

// Simulation designs: five Gaussian Fourier coefficients per curve and a
// per-curve upper endpoint d_i that is either tied to the level coefficient
// (dependent designs, violating MCAR) or independent of the curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pofd/basis.hpp"
#include "pofd/core.hpp"
#include "pofd/rng.hpp"

namespace pofd {

enum class DgpKind {
  DepDis,          // d_i = 0.5 if xi_1 < mu_1 else 1
  DepCon,          // censored probability transform of xi_1
  IndDis,          // d_i in {0.5, 1} fair coin
  IndCon,          // d_i ~ U[0.5, 1]
  DepDisMirrored,  // DepDis with missing beginnings: observed on [1 - d_i, 1]
  V2DepDis,        // basis {1, t, Fourier...}, DepDis rule on xi_1 + xi_2
};

inline std::string_view to_string(DgpKind k) {
  switch (k) {
    case DgpKind::DepDis: return "depdis";
    case DgpKind::DepCon: return "depcon";
    case DgpKind::IndDis: return "inddis";
    case DgpKind::IndCon: return "indcon";
    case DgpKind::DepDisMirrored: return "depdis-mirrored";
    case DgpKind::V2DepDis: return "v2-depdis";
  }
  return "?";
}

inline DgpKind parse_dgp_kind(std::string_view s) {
  for (DgpKind k : {DgpKind::DepDis, DgpKind::DepCon, DgpKind::IndDis, DgpKind::IndCon, DgpKind::DepDisMirrored,
                    DgpKind::V2DepDis})
    if (s == to_string(k)) return k;
  throw ArgumentError("unknown DGP '" + std::string(s) + "'");
}

inline constexpr std::size_t kDgpCoefficients = 5;

struct DgpConfig {
  DgpKind kind = DgpKind::DepDis;
  std::size_t n = 100;
  std::size_t p = 501;
  std::array<double, kDgpCoefficients> mu{5.0, 2.0, 0.0, 0.0, 0.0};
  std::array<double, kDgpCoefficients> lambda{10.0, 8.0, 6.0, 4.0, 2.0};
  std::uint64_t seed = 1;
};

struct DgpDraw {
  FunctionalSample sample;
  Vector d;   // drawn endpoints (continuous for the Con designs)
  Matrix xi;  // n x 5 coefficients
};

/// Columns of the generating basis on the given points: the J = 5 Fourier
/// system on [0, 1], or {1, t, sqrt2 sin 2pi t, sqrt2 cos 2pi t, sqrt2 sin 4pi t}
/// for the V2 design.
inline Matrix dgp_basis(DgpKind kind, std::span<const double> points) {
  Matrix b = eval_basis(BasisSpec(kDgpCoefficients, Interval{0.0, 1.0}), points);
  if (kind == DgpKind::V2DepDis) {
    for (std::size_t r = 0; r < points.size(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      const double sin4 = b(row, 3);
      b(row, 4) = sin4;                     // sqrt2 sin 4 pi t
      b(row, 3) = b(row, 2);                // sqrt2 cos 2 pi t
      b(row, 2) = b(row, 1);                // sqrt2 sin 2 pi t
      b(row, 1) = points[r];                // t
    }
  }
  return b;
}

inline double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

inline DgpDraw draw_sample(const DgpConfig& cfg) {
  if (cfg.n == 0) throw ArgumentError("draw_sample: n must be positive");
  for (double l : cfg.lambda)
    if (!(l > 0.0)) throw ArgumentError("draw_sample: coefficient variances must be positive");
  const Grid grid = make_grid(cfg.p, 0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(cfg.n);

  // Coefficients come from their own stream so every kind shares them.
  Engine coef_rng = make_engine(cfg.seed, 0);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix xi(n, static_cast<Eigen::Index>(kDgpCoefficients));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < kDgpCoefficients; ++j)
      xi(i, static_cast<Eigen::Index>(j)) = cfg.mu[j] + std::sqrt(cfg.lambda[j]) * z(coef_rng);

  Engine d_rng = make_engine(cfg.seed, 1);
  Vector d(n);
  switch (cfg.kind) {
    case DgpKind::DepDis:
    case DgpKind::DepDisMirrored:
      for (Eigen::Index i = 0; i < n; ++i) d(i) = (xi(i, 0) - cfg.mu[0] < 0.0) ? 0.5 : 1.0;
      break;
    case DgpKind::V2DepDis:
      for (Eigen::Index i = 0; i < n; ++i)
        d(i) = (xi(i, 0) + xi(i, 1) - cfg.mu[0] - cfg.mu[1] < 0.0) ? 0.5 : 1.0;
      break;
    case DgpKind::DepCon: {
      Vector raw(n);
      for (Eigen::Index i = 0; i < n; ++i) raw(i) = normal_cdf(xi(i, 0), cfg.mu[0], cfg.lambda[0]);
      std::vector<double> sorted(raw.data(), raw.data() + n);
      std::sort(sorted.begin(), sorted.end());
      const auto forced = static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(cfg.n)));
      const double q98 = sorted[cfg.n - forced];
      for (Eigen::Index i = 0; i < n; ++i) d(i) = raw(i) <= 0.5 ? 0.5 : (raw(i) >= q98 ? 1.0 : raw(i));
      break;
    }
    case DgpKind::IndDis: {
      std::bernoulli_distribution coin(0.5);
      for (Eigen::Index i = 0; i < n; ++i) d(i) = coin(d_rng) ? 1.0 : 0.5;
      break;
    }
    case DgpKind::IndCon: {
      std::uniform_real_distribution<double> u(0.5, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) d(i) = u(d_rng);
      break;
    }
  }

  const Matrix basis = dgp_basis(cfg.kind, grid.points());
  Matrix values = xi * basis.transpose();
  Mask mask(n, static_cast<Eigen::Index>(cfg.p));
  const double tol = 1e-12;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cfg.p; ++j) {
      const double t = grid[j];
      mask(i, static_cast<Eigen::Index>(j)) =
          cfg.kind == DgpKind::DepDisMirrored ? t >= 1.0 - d(i) - tol : t <= d(i) + tol;
    }
  }
  return DgpDraw{FunctionalSample(grid, std::move(values), std::move(mask)), std::move(d), std::move(xi)};
}

/// Pointwise truth for the Table designs (Fourier basis) or the V2 design.
inline double true_mean(double t, const DgpConfig& cfg) {
  const double pt[1] = {t};
  const Matrix b = dgp_basis(cfg.kind, pt);
  double s = 0.0;
  for (std::size_t j = 0; j < kDgpCoefficients; ++j) s += cfg.mu[j] * b(0, static_cast<Eigen::Index>(j));
  return s;
}

inline double true_cov(double s, double t, const DgpConfig& cfg) {
  const double pts[2] = {s, t};
  const Matrix b = dgp_basis(cfg.kind, pts);
  double out = 0.0;
  for (std::size_t j = 0; j < kDgpCoefficients; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    out += cfg.lambda[j] * b(0, c) * b(1, c);
  }
  return out;
}

/// mu(t) = 5 + 2 sqrt2 sin(2 pi t) with the default coefficient moments.
inline double true_mean(double t) { return true_mean(t, DgpConfig{}); }
inline double true_cov(double s, double t) { return true_cov(s, t, DgpConfig{}); }

inline Vector true_mean_on(const Grid& g, const DgpConfig& cfg) {
  const Matrix b = dgp_basis(cfg.kind, g.points());
  const Eigen::Map<const Vector> mu(cfg.mu.data(), static_cast<Eigen::Index>(kDgpCoefficients));
  return b * mu;
}

inline Matrix true_cov_on(const Grid& g, const DgpConfig& cfg) {
  const Matrix b = dgp_basis(cfg.kind, g.points());
  const Eigen::Map<const Vector> lam(cfg.lambda.data(), static_cast<Eigen::Index>(kDgpCoefficients));
  return b * lam.asDiagonal() * b.transpose();
}

/// Limit bias of the classical mean under DepDis: curves observed beyond 0.5
/// are those with xi_1 > mu_1, whose conditional mean exceeds mu_1 by
/// sqrt(lambda_1) E[Z | Z > 0] = sqrt(2 lambda_1 / pi).
inline double analytic_bias_dep_dis(double t, double lambda1 = 10.0) {
  if (t < 0.0 || t > 1.0) throw ArgumentError("analytic_bias_dep_dis: t outside [0, 1]");
  return t <= 0.5 ? 0.0 : std::sqrt(2.0 * lambda1 / std::numbers::pi);
}

}  // namespace pofd

#endif  // POFD_DGP_HPP
