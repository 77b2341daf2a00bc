#pragma once

#include "polycd/objective.hpp"

#include <memory>
#include <numbers>

namespace polycd {

/// Huber loss: t^2/2 for 0 <= t <= mu, mu t - mu^2/2 beyond.
inline double huber(double t, double mu) { return t <= mu ? 0.5 * t * t : mu * t - 0.5 * mu * mu; }

/// Gaussian kernel (2 pi sigma^2)^{-d/2} exp(-||x - y||^2 / (2 sigma^2)).
class GaussianKernel {
 public:
  GaussianKernel(double sigma, Index dim) : sigma_(sigma), dim_(dim) {
    require(sigma > 0.0, "GaussianKernel: bandwidth must be positive");
    norm_ = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * static_cast<double>(dim));
    inv_two_var_ = 1.0 / (2.0 * sigma * sigma);
  }

  template <class A, class B>
  double operator()(const A& x, const B& y) const {
    return norm_ * std::exp(-(x - y).squaredNorm() * inv_two_var_);
  }

  /// Value on the diagonal, K(x, x).
  double peak() const { return norm_; }
  double sigma() const { return sigma_; }
  Index dim() const { return dim_; }

 private:
  double sigma_;
  Index dim_;
  double norm_;
  double inv_two_var_;
};

/**
 * \brief Robust kernel density objective over the simplex of sample weights:
 * f(w) = sum_i huber(sqrt(w^T K w - 2 (K w)_i + K_ii)).
 *
 * The kernel matrix is never stored. The cache holds u = K w and
 * q = w^T K w; a step toward e_j evaluates one kernel column (n kernel
 * calls), so segment operations are O(n) kernel evaluations.
 */
class KdeHuberObjective {
 public:
  KdeHuberObjective(std::shared_ptr<const Matrix> points, double sigma, double mu_huber)
      : points_(std::move(points)), kernel_(sigma, points_ ? points_->rows() : 1), mu_(mu_huber) {
    require(points_ != nullptr, "KdeHuberObjective: null data");
    require(points_->cols() >= 1, "KdeHuberObjective: need at least one sample");
    require(mu_huber > 0.0, "KdeHuberObjective: Huber threshold must be positive");
    const Index n = samples();
    counter_.set_interval(std::max<int>(kDefaultRefreshInterval, static_cast<int>(n)));
    x_ = Vector::Zero(n);
    x_[0] = 1.0;
    refresh();
    lipschitz_ = estimate_smoothness();
  }

  KdeHuberObjective(Matrix points, double sigma, double mu_huber)
      : KdeHuberObjective(std::make_shared<const Matrix>(std::move(points)), sigma, mu_huber) {}

  Index dim() const { return points_->cols(); }
  Index samples() const { return points_->cols(); }
  const Matrix& points() const { return *points_; }
  const GaussianKernel& kernel() const { return kernel_; }
  double huber_threshold() const { return mu_; }
  const Vector& x() const { return x_; }
  const Vector& kernel_times_weights() const { return u_; }
  double quadratic_form() const { return q_; }

  double kernel_entry(Index i, Index j) const { return kernel_(points_->col(i), points_->col(j)); }

  /// Column K e_j, evaluated on demand.
  Vector kernel_column(Index j) const {
    Vector col(samples());
    fill_column(j, col);
    return col;
  }

  void reset(const Vector& w) {
    require(w.size() == dim(), "reset: dimension mismatch");
    x_ = w;
    refresh();
  }

  void refresh() {
    u_ = apply_kernel(x_);
    q_ = x_.dot(u_);
    counter_.reset();
    column_key_ = -1;
  }

  double value() const { return loss(u_, q_); }

  double value_at(const Vector& w) const {
    require(w.size() == dim(), "value_at: dimension mismatch");
    const Vector u = apply_kernel(w);
    return loss(u, w.dot(u));
  }

  Vector gradient() const { return gradient_from(u_, q_); }

  Vector gradient_at(const Vector& w) const {
    const Vector u = apply_kernel(w);
    return gradient_from(u, w.dot(u));
  }

  SegmentQuery segment(const VertexPolytope& p, Index i) const {
    const double slope = segment_slope(p, i, 0.0);
    const double sq = p.squared_distance(i, x_);
    return {slope, sq, lipschitz_ * sq};
  }

  double segment_slope(const VertexPolytope& p, Index i, double alpha) const {
    return slope_at(column(p, i), i, alpha);
  }

  double line_search(const VertexPolytope& p, Index i, double lo, double hi) const {
    const Vector& col = column(p, i);
    return bisect_derivative([&](double alpha) { return slope_at(col, i, alpha); }, lo, hi);
  }

  void step(const VertexPolytope& p, Index i, double alpha) {
    if (alpha == 0.0) return;
    const Vector& col = column(p, i);
    const double beta = 1.0 - alpha;
    q_ = beta * beta * q_ + 2.0 * alpha * beta * u_[i] + alpha * alpha * kernel_.peak();
    u_ = beta * u_ + alpha * col;
    p.move_toward(x_, i, alpha);
    if (counter_.tick()) refresh();
  }

  /**
   * Certified smoothness bound n * max_i sum_j K_ij. Each summand
   * huber(||Phi w - Phi e_i||) has Hessian at most K in w, and the row-sum
   * bound dominates the largest eigenvalue of the nonnegative matrix K.
   */
  double estimate_smoothness() const {
    const Index n = samples();
    double worst = 0.0;
    Vector col(n);
    for (Index j = 0; j < n; ++j) {
      fill_column(j, col);
      worst = std::max(worst, col.sum());
    }
    return std::max(static_cast<double>(n) * worst, kSmoothnessFloor);
  }
  double smoothness() const { return lipschitz_; }
  void set_smoothness(double lipschitz) {
    require(lipschitz > 0.0, "set_smoothness: L must be positive");
    lipschitz_ = lipschitz;
  }

  /// Relative mismatch of (u, q) against a fresh computation.
  double cache_drift() const {
    const Vector fresh = apply_kernel(x_);
    const double fresh_q = x_.dot(fresh);
    const double du = (fresh - u_).norm() / std::max(1.0, fresh.norm());
    const double dq = std::abs(fresh_q - q_) / std::max(1.0, std::abs(fresh_q));
    return std::max(du, dq);
  }

  void set_refresh_interval(int steps) { counter_.set_interval(steps); }

  /// Stores the full n x n kernel matrix so later kernel products are dense
  /// matrix-vector products. Costs 8 n^2 bytes.
  void cache_kernel_matrix() {
    const Index n = samples();
    auto k = std::make_shared<Matrix>(n, n);
    Vector col(n);
    for (Index j = 0; j < n; ++j) {
      fill_column(j, col);
      k->col(j) = col;
    }
    dense_ = std::move(k);
  }
  bool has_kernel_matrix() const { return dense_ != nullptr; }

  /// d/ds huber(sqrt(s)) * 2 = min(1, mu / sqrt(s)).
  double weight(double s) const {
    const double t = std::sqrt(std::max(s, 0.0));
    return t <= mu_ ? 1.0 : mu_ / t;
  }

 private:
  void fill_column(Index j, Vector& col) const {
    if (dense_) {
      col = dense_->col(j);
      return;
    }
    const auto xj = points_->col(j);
    for (Index k = 0; k < samples(); ++k) col[k] = kernel_(points_->col(k), xj);
  }

  /// K w, skipping zero weights.
  Vector apply_kernel(const Vector& w) const {
    if (dense_) return (*dense_) * w;
    const Index n = samples();
    Vector out = Vector::Zero(n);
    Vector col(n);
    for (Index j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;
      fill_column(j, col);
      out += w[j] * col;
    }
    return out;
  }

  double loss(const Vector& u, double q) const {
    const double peak = kernel_.peak();
    double total = 0.0;
    for (Index k = 0; k < u.size(); ++k) {
      const double s = std::max(q - 2.0 * u[k] + peak, 0.0);
      total += huber(std::sqrt(s), mu_);
    }
    return total;
  }

  /// grad = (sum_i omega_i) u - K omega, omega_i = weight(s_i).
  Vector gradient_from(const Vector& u, double q) const {
    const Index n = samples();
    const double peak = kernel_.peak();
    Vector omega(n);
    for (Index k = 0; k < n; ++k) omega[k] = weight(q - 2.0 * u[k] + peak);
    return omega.sum() * u - apply_kernel(omega);
  }

  double slope_at(const Vector& col, Index j, double alpha) const {
    const double peak = kernel_.peak();
    const double beta = 1.0 - alpha;
    const double q_alpha = beta * beta * q_ + 2.0 * alpha * beta * u_[j] + alpha * alpha * peak;
    const double dq = -2.0 * beta * q_ + 2.0 * (1.0 - 2.0 * alpha) * u_[j] + 2.0 * alpha * peak;
    double total = 0.0;
    for (Index k = 0; k < samples(); ++k) {
      const double u_alpha = beta * u_[k] + alpha * col[k];
      const double s = q_alpha - 2.0 * u_alpha + peak;
      const double ds = dq - 2.0 * (col[k] - u_[k]);
      total += 0.5 * weight(s) * ds;
    }
    return total;
  }

  const Vector& column(const VertexPolytope& p, Index i) const {
    require(p.kind() == PolytopeKind::StandardSimplex && p.size() == samples(),
            "KdeHuberObjective: polytope must be the standard simplex over the samples");
    p.check_index(i);
    if (column_key_ != i) {
      column_.resize(samples());
      fill_column(i, column_);
      column_key_ = i;
    }
    return column_;
  }

  std::shared_ptr<const Matrix> points_;
  GaussianKernel kernel_;
  double mu_;
  Vector x_;
  Vector u_;
  double q_ = 0.0;
  double lipschitz_ = 1.0;
  RefreshCounter counter_;
  std::shared_ptr<const Matrix> dense_;

  mutable Vector column_;
  mutable Index column_key_ = -1;
};

}  // namespace polycd
