#pragma once

#include "polycd/objective.hpp"

#include <memory>

namespace polycd {

/// f(x) = x^T Q x / 2 + c^T x + offset, Q symmetric PSD. The product Q x is
/// cached, so segment queries cost O(d).
class QuadraticObjective {
 public:
  QuadraticObjective(Matrix q, Vector c, double offset = 0.0)
      : q_(std::make_shared<const Matrix>(std::move(q))),
        c_(std::make_shared<const Vector>(std::move(c))),
        offset_(offset) {
    require(q_->rows() == q_->cols(), "QuadraticObjective: Q must be square");
    require(q_->rows() == c_->size(), "QuadraticObjective: c length must match Q");
    require(q_->rows() >= 1, "QuadraticObjective: empty problem");
    x_ = Vector::Zero(q_->rows());
    qx_ = Vector::Zero(q_->rows());
    lipschitz_ = estimate_smoothness();
  }

  Index dim() const { return q_->rows(); }
  const Matrix& hessian() const { return *q_; }
  const Vector& linear() const { return *c_; }
  const Vector& x() const { return x_; }

  void reset(const Vector& x) {
    require(x.size() == dim(), "reset: dimension mismatch");
    x_ = x;
    refresh();
  }

  void refresh() {
    qx_.noalias() = (*q_) * x_;
    counter_.reset();
  }

  double value() const { return 0.5 * x_.dot(qx_) + c_->dot(x_) + offset_; }
  double value_at(const Vector& x) const { return 0.5 * x.dot((*q_) * x) + c_->dot(x) + offset_; }
  Vector gradient() const { return qx_ + *c_; }
  Vector gradient_at(const Vector& x) const { return (*q_) * x + *c_; }

  SegmentQuery segment(const VertexPolytope& p, Index i) const {
    const auto [slope, curv] = directional(p, i);
    return {slope, p.squared_distance(i, x_), curv};
  }

  double segment_slope(const VertexPolytope& p, Index i, double alpha) const {
    const auto [slope, curv] = directional(p, i);
    return slope + alpha * curv;
  }

  double line_search(const VertexPolytope& p, Index i, double lo, double hi) const {
    const auto [slope, curv] = directional(p, i);
    return quadratic_line_min(slope, curv, lo, hi);
  }

  void step(const VertexPolytope& p, Index i, double alpha) {
    if (alpha == 0.0) return;
    const Vector qv = p.image(*q_, i);
    qx_ = (1.0 - alpha) * qx_ + alpha * qv;
    p.move_toward(x_, i, alpha);
    if (counter_.tick()) refresh();
  }

  double pair_line_search(Index i, Index j, double lo, double hi) const {
    const double slope = (qx_[i] + (*c_)[i]) - (qx_[j] + (*c_)[j]);
    const double curv = (*q_)(i, i) + (*q_)(j, j) - 2.0 * (*q_)(i, j);
    return quadratic_line_min(slope, curv, lo, hi);
  }

  void pair_step(Index i, Index j, double theta) {
    if (theta == 0.0) return;
    qx_ += theta * (q_->col(i) - q_->col(j));
    x_[i] += theta;
    x_[j] -= theta;
    if (counter_.tick()) refresh();
  }

  double estimate_smoothness() const {
    return std::max(power_iteration([&](const Vector& v) -> Vector { return (*q_) * v; }, dim()) *
                        kSmoothnessSafety,
                    kSmoothnessFloor);
  }
  double smoothness() const { return lipschitz_; }
  void set_smoothness(double lipschitz) {
    require(lipschitz > 0.0, "set_smoothness: L must be positive");
    lipschitz_ = lipschitz;
  }

  double cache_drift() const {
    const Vector fresh = (*q_) * x_;
    return (fresh - qx_).norm() / std::max(1.0, fresh.norm());
  }

  void set_refresh_interval(int steps) { counter_.set_interval(steps); }

 private:
  struct Directional {
    double slope;
    double curvature;
  };

  Directional directional(const VertexPolytope& p, Index i) const {
    require(p.dim() == dim(), "objective/polytope dimension mismatch");
    const Vector qv = p.image(*q_, i);
    const double vqv = p.dot(i, qv);
    const double vqx = p.dot(i, qx_);
    const double xqx = x_.dot(qx_);
    const double slope = vqx - xqx + p.dot(i, *c_) - c_->dot(x_);
    const double curv = std::max(vqv - 2.0 * vqx + xqx, 0.0);
    return {slope, curv};
  }

  std::shared_ptr<const Matrix> q_;
  std::shared_ptr<const Vector> c_;
  double offset_;
  Vector x_;
  Vector qx_;
  double lipschitz_ = 1.0;
  RefreshCounter counter_;
};

}  // namespace polycd
