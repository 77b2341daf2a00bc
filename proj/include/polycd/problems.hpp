#pragma once

#include "polycd/rng.hpp"
#include "polycd/types.hpp"

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <vector>

namespace polycd {

struct LassoSpec {
  Index n = 200;
  Index d = 200;
  Index r = 20;
  double snr = 1.0;
  double rho = 0.1;
  std::uint64_t seed = 1;
};

struct LogisticSpec {
  Index n = 200;
  Index d = 200;
  Index r = 20;
  double s = 1.0;
  double rho = 0.1;
  std::uint64_t seed = 1;
};

struct KdeSpec {
  Index n = 2000;
  Index d = 2;
  Index m = 10;
  double outlier_fraction = 0.01;
  double sigma_kernel = 1.0;
  double mu_huber = 0.4;
  std::uint64_t seed = 1;
};

struct RegressionData {
  Matrix a;
  Vector b;
  Vector x_star;
  double radius = 0.0;
  /// Noise standard deviation (least squares only).
  double noise_sd = 0.0;
};

struct KdeData {
  /// Samples as columns, d x n; inliers first.
  Matrix points;
  Vector mixture_weights;
  /// Component means as columns, d x m.
  Matrix means;
  /// Per-component variance: component j has covariance variances[j] I.
  Vector variances;
  Index outliers = 0;
};

namespace detail {

inline void validate_design(Index n, Index d, Index r, double rho) {
  require(n >= 1 && d >= 1, "problem sizes must be positive");
  require(r >= 1 && r <= d, "support size must satisfy 1 <= r <= d");
  require(rho >= 0.0 && rho < 1.0, "correlation must lie in [0, 1)");
}

/// Rows iid N(0, (1 - rho) I + rho 11^T) via sqrt(1 - rho) z + sqrt(rho) g 1.
inline Matrix correlated_design(Index n, Index d, double rho, Rng& rng) {
  Matrix a(n, d);
  const double own = std::sqrt(1.0 - rho);
  const double shared = std::sqrt(rho);
  for (Index i = 0; i < n; ++i) {
    const double g = rng.normal();
    for (Index j = 0; j < d; ++j) a(i, j) = own * rng.normal() + shared * g;
  }
  return a;
}

/// Binary vector with r ones at uniformly random distinct positions.
inline Vector sparse_binary(Index d, Index r, Rng& rng) {
  std::vector<Index> pos(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) pos[static_cast<std::size_t>(j)] = j;
  Vector x = Vector::Zero(d);
  for (Index k = 0; k < r; ++k) {
    const auto pick = k + static_cast<Index>(rng.index(static_cast<std::uint64_t>(d - k)));
    std::swap(pos[static_cast<std::size_t>(k)], pos[static_cast<std::size_t>(pick)]);
    x[pos[static_cast<std::size_t>(k)]] = 1.0;
  }
  return x;
}

}  // namespace detail

/// Uniform draw from the probability simplex of size m (normalized Exp(1)).
inline Vector uniform_simplex(Index m, Rng& rng) {
  require(m >= 1, "uniform_simplex: size must be positive");
  Vector w(m);
  for (Index j = 0; j < m; ++j) w[j] = rng.exponential();
  return w / w.sum();
}

/**
 * Sparse regression data b = A x* + eps with eps ~ N(0, sigma^2 I), where
 * sigma is solved from the realized ||A x*||^2 so that
 * ||A x*||^2 / (n sigma^2) = snr.
 */
inline RegressionData gen_lasso(const LassoSpec& spec) {
  detail::validate_design(spec.n, spec.d, spec.r, spec.rho);
  require(spec.snr > 0.0, "snr must be positive");
  Rng rng(spec.seed);
  RegressionData out;
  out.a = detail::correlated_design(spec.n, spec.d, spec.rho, rng);
  out.x_star = detail::sparse_binary(spec.d, spec.r, rng);
  const Vector signal = out.a * out.x_star;
  out.noise_sd = std::sqrt(signal.squaredNorm() / (static_cast<double>(spec.n) * spec.snr));
  out.b = signal;
  for (Index i = 0; i < spec.n; ++i) out.b[i] += out.noise_sd * rng.normal();
  out.radius = out.x_star.lpNorm<1>();
  return out;
}

/// Logistic data with P(b_i = 1) = 1 / (1 + exp(-s a_i^T x*)), labels in {-1, +1}.
inline RegressionData gen_logistic(const LogisticSpec& spec) {
  detail::validate_design(spec.n, spec.d, spec.r, spec.rho);
  Rng rng(spec.seed);
  RegressionData out;
  out.a = detail::correlated_design(spec.n, spec.d, spec.rho, rng);
  out.x_star = detail::sparse_binary(spec.d, spec.r, rng);
  const Vector margin = out.a * out.x_star;
  out.b.resize(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-spec.s * margin[i]));
    out.b[i] = rng.uniform() < prob ? 1.0 : -1.0;
  }
  out.radius = out.x_star.lpNorm<1>();
  return out;
}

/**
 * Gaussian-mixture samples with outliers. Mixture weights are uniform on
 * the simplex, means iid N(0, 16 I), component covariance v_j I with
 * v_j ~ U[0.2, 1.2]; the last floor(n * outlier_fraction) samples are
 * N(0, 2500 I) outliers.
 */
inline KdeData gen_kde(const KdeSpec& spec) {
  require(spec.n >= 1 && spec.d >= 1 && spec.m >= 1, "gen_kde: sizes must be positive");
  require(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0, "gen_kde: outlier fraction must lie in [0, 1)");
  Rng rng(spec.seed);
  KdeData out;
  out.mixture_weights = uniform_simplex(spec.m, rng);
  out.means.resize(spec.d, spec.m);
  for (Index j = 0; j < spec.m; ++j)
    for (Index k = 0; k < spec.d; ++k) out.means(k, j) = 4.0 * rng.normal();
  out.variances.resize(spec.m);
  for (Index j = 0; j < spec.m; ++j) out.variances[j] = rng.uniform(0.2, 1.2);

  out.outliers = static_cast<Index>(std::floor(static_cast<double>(spec.n) * spec.outlier_fraction));
  const Index inliers = spec.n - out.outliers;
  out.points.resize(spec.d, spec.n);
  for (Index i = 0; i < inliers; ++i) {
    const double u = rng.uniform();
    Index comp = spec.m - 1;
    double acc = 0.0;
    for (Index j = 0; j < spec.m; ++j) {
      acc += out.mixture_weights[j];
      if (u < acc) {
        comp = j;
        break;
      }
    }
    const double sd = std::sqrt(out.variances[comp]);
    for (Index k = 0; k < spec.d; ++k) out.points(k, i) = out.means(k, comp) + sd * rng.normal();
  }
  for (Index i = inliers; i < spec.n; ++i)
    for (Index k = 0; k < spec.d; ++k) out.points(k, i) = 50.0 * rng.normal();
  return out;
}

/// One row per sample: the row of A followed by the response, tab separated.
inline void write_tsv(std::ostream& os, const Matrix& a, const Vector& b) {
  require(a.rows() == b.size(), "write_tsv: row count mismatch");
  os << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) os << a(i, j) << '\t';
    os << b[i] << '\n';
  }
}

/// One row per sample (column of `points`), tab separated.
inline void write_tsv(std::ostream& os, const Matrix& points) {
  os << std::setprecision(17);
  for (Index i = 0; i < points.cols(); ++i) {
    for (Index k = 0; k < points.rows(); ++k) os << (k ? "\t" : "") << points(k, i);
    os << '\n';
  }
}

}  // namespace polycd
