#pragma once

#include "polycd/objective.hpp"

#include <memory>

namespace polycd {

/**
 * \brief f(x) = ||A x - b||^2 with the residual r = A x - b cached.
 *
 * Segment queries toward a one-hot vertex read one column of A, so they
 * cost O(n + d). The residual is rebuilt from scratch every
 * `refresh_interval` steps to bound floating-point drift.
 */
class LeastSquaresObjective {
 public:
  LeastSquaresObjective(std::shared_ptr<const Matrix> a, std::shared_ptr<const Vector> b)
      : a_(std::move(a)), b_(std::move(b)) {
    require(a_ && b_, "LeastSquaresObjective: null data");
    require(a_->rows() == b_->size(), "LeastSquaresObjective: A rows must match b length");
    require(a_->cols() >= 1, "LeastSquaresObjective: A must have at least one column");
    x_ = Vector::Zero(a_->cols());
    residual_ = -(*b_);
    lipschitz_ = estimate_smoothness();
  }

  LeastSquaresObjective(Matrix a, Vector b)
      : LeastSquaresObjective(std::make_shared<const Matrix>(std::move(a)),
                              std::make_shared<const Vector>(std::move(b))) {}

  Index dim() const { return a_->cols(); }
  Index samples() const { return a_->rows(); }
  const Matrix& matrix() const { return *a_; }
  const Vector& response() const { return *b_; }
  std::shared_ptr<const Matrix> matrix_ptr() const { return a_; }
  std::shared_ptr<const Vector> response_ptr() const { return b_; }

  const Vector& x() const { return x_; }
  const Vector& residual() const { return residual_; }

  void reset(const Vector& x) {
    require(x.size() == dim(), "reset: dimension mismatch");
    x_ = x;
    refresh();
  }

  void refresh() {
    residual_.noalias() = (*a_) * x_;
    residual_ -= *b_;
    counter_.reset();
    image_key_ = -1;
  }

  double value() const { return residual_.squaredNorm(); }

  double value_at(const Vector& x) const { return ((*a_) * x - *b_).squaredNorm(); }

  Vector gradient() const { return 2.0 * (a_->transpose() * residual_); }

  Vector gradient_at(const Vector& x) const {
    return 2.0 * (a_->transpose() * ((*a_) * x - *b_));
  }

  SegmentQuery segment(const VertexPolytope& p, Index i) const {
    const Vector& delta = residual_change(p, i);
    return {2.0 * residual_.dot(delta), p.squared_distance(i, x_), 2.0 * delta.squaredNorm()};
  }

  /// Derivative of alpha -> f(x + alpha (v - x)).
  double segment_slope(const VertexPolytope& p, Index i, double alpha) const {
    const Vector& delta = residual_change(p, i);
    return 2.0 * residual_.dot(delta) + 2.0 * alpha * delta.squaredNorm();
  }

  /// Closed-form exact minimisation along the segment, clamped to [lo, hi].
  double line_search(const VertexPolytope& p, Index i, double lo, double hi) const {
    require(lo <= hi, "line_search: empty interval");
    const Vector& delta = residual_change(p, i);
    return quadratic_line_min(2.0 * residual_.dot(delta), 2.0 * delta.squaredNorm(), lo, hi);
  }

  void step(const VertexPolytope& p, Index i, double alpha) {
    if (alpha == 0.0) return;
    const Vector& delta = residual_change(p, i);
    residual_ += alpha * delta;
    p.move_toward(x_, i, alpha);
    image_key_ = -1;
    if (counter_.tick()) refresh();
  }

  /// Exact minimisation of theta -> f(x + theta (e_i - e_j)) over [lo, hi].
  double pair_line_search(Index i, Index j, double lo, double hi) const {
    require(lo <= hi, "pair_line_search: empty interval");
    const auto di = a_->col(i);
    const auto dj = a_->col(j);
    double slope = 0.0;
    double curv = 0.0;
    for (Index k = 0; k < samples(); ++k) {
      const double dk = di[k] - dj[k];
      slope += residual_[k] * dk;
      curv += dk * dk;
    }
    return quadratic_line_min(2.0 * slope, 2.0 * curv, lo, hi);
  }

  void pair_step(Index i, Index j, double theta) {
    if (theta == 0.0) return;
    residual_ += theta * (a_->col(i) - a_->col(j));
    x_[i] += theta;
    x_[j] -= theta;
    image_key_ = -1;
    if (counter_.tick()) refresh();
  }

  /// Certified bound 2 sigma_max(A)^2 from power iteration, with a 1.01
  /// safety factor and a small floor.
  double estimate_smoothness() const {
    return std::max(2.0 * squared_spectral_norm(*a_) * kSmoothnessSafety, kSmoothnessFloor);
  }

  double smoothness() const { return lipschitz_; }
  void set_smoothness(double lipschitz) {
    require(lipschitz > 0.0, "set_smoothness: L must be positive");
    lipschitz_ = lipschitz;
  }

  /// Relative difference between the incremental residual and a fresh one.
  double cache_drift() const {
    const Vector fresh = (*a_) * x_ - *b_;
    return (fresh - residual_).norm() / std::max(1.0, fresh.norm());
  }

  void set_refresh_interval(int steps) { counter_.set_interval(steps); }

 private:
  /// A v^i - A x = A v^i - b - r, cached for the last queried vertex.
  const Vector& residual_change(const VertexPolytope& p, Index i) const {
    require(p.dim() == dim(), "objective/polytope dimension mismatch");
    if (image_key_ != i || image_owner_ != &p || image_kind_ != p.kind() || image_size_ != p.size() ||
        image_radius_ != p.radius()) {
      if (auto at = p.atom(i)) {
        delta_.noalias() = at->value * a_->col(at->coord);
      } else {
        delta_.noalias() = (*a_) * p.explicit_matrix().col(i);
      }
      delta_ -= *b_;
      delta_ -= residual_;
      image_key_ = i;
      image_owner_ = &p;
      image_kind_ = p.kind();
      image_size_ = p.size();
      image_radius_ = p.radius();
    }
    return delta_;
  }

  std::shared_ptr<const Matrix> a_;
  std::shared_ptr<const Vector> b_;
  Vector x_;
  Vector residual_;
  double lipschitz_ = 1.0;
  RefreshCounter counter_;

  mutable Vector delta_;
  mutable Index image_key_ = -1;
  mutable const VertexPolytope* image_owner_ = nullptr;
  mutable PolytopeKind image_kind_ = PolytopeKind::StandardSimplex;
  mutable Index image_size_ = 0;
  mutable double image_radius_ = 0.0;
};

}  // namespace polycd
