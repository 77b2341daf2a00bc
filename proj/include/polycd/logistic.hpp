#pragma once

#include "polycd/objective.hpp"

#include <memory>

namespace polycd {

namespace detail {

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// 1 / (1 + exp(-t))
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/**
 * \brief f(x) = sum_i log(1 + exp(-y_i a_i^T x)) with labels y_i in {-1, +1}.
 *
 * The margins m_i = y_i a_i^T x are cached. Line search bisects the
 * derivative along the segment, which is O(n) per evaluation.
 */
class LogisticObjective {
 public:
  LogisticObjective(std::shared_ptr<const Matrix> a, std::shared_ptr<const Vector> labels)
      : a_(std::move(a)), labels_(std::move(labels)) {
    require(a_ && labels_, "LogisticObjective: null data");
    require(a_->rows() == labels_->size(), "LogisticObjective: A rows must match label count");
    require(a_->cols() >= 1, "LogisticObjective: A must have at least one column");
    for (Index k = 0; k < labels_->size(); ++k)
      require((*labels_)[k] == 1.0 || (*labels_)[k] == -1.0, "LogisticObjective: labels must be +1 or -1");
    x_ = Vector::Zero(a_->cols());
    margins_ = Vector::Zero(a_->rows());
    lipschitz_ = estimate_smoothness();
  }

  LogisticObjective(Matrix a, Vector labels)
      : LogisticObjective(std::make_shared<const Matrix>(std::move(a)),
                          std::make_shared<const Vector>(std::move(labels))) {}

  Index dim() const { return a_->cols(); }
  Index samples() const { return a_->rows(); }
  const Matrix& matrix() const { return *a_; }
  const Vector& labels() const { return *labels_; }
  const Vector& x() const { return x_; }
  const Vector& margins() const { return margins_; }

  void reset(const Vector& x) {
    require(x.size() == dim(), "reset: dimension mismatch");
    x_ = x;
    refresh();
  }

  void refresh() {
    margins_ = labels_->cwiseProduct((*a_) * x_);
    counter_.reset();
    image_key_ = -1;
  }

  double value() const { return loss(margins_); }
  double value_at(const Vector& x) const { return loss(labels_->cwiseProduct((*a_) * x)); }

  Vector gradient() const { return gradient_from_margins(margins_); }
  Vector gradient_at(const Vector& x) const {
    return gradient_from_margins(labels_->cwiseProduct((*a_) * x));
  }

  SegmentQuery segment(const VertexPolytope& p, Index i) const {
    const Vector& dm = margin_change(p, i);
    return {slope_at(dm, 0.0), p.squared_distance(i, x_), 0.25 * dm.squaredNorm()};
  }

  double segment_slope(const VertexPolytope& p, Index i, double alpha) const {
    return slope_at(margin_change(p, i), alpha);
  }

  double line_search(const VertexPolytope& p, Index i, double lo, double hi) const {
    const Vector& dm = margin_change(p, i);
    return bisect_derivative([&](double alpha) { return slope_at(dm, alpha); }, lo, hi);
  }

  void step(const VertexPolytope& p, Index i, double alpha) {
    if (alpha == 0.0) return;
    margins_ += alpha * margin_change(p, i);
    p.move_toward(x_, i, alpha);
    image_key_ = -1;
    if (counter_.tick()) refresh();
  }

  double pair_line_search(Index i, Index j, double lo, double hi) const {
    const Vector dm = labels_->cwiseProduct(a_->col(i) - a_->col(j));
    return bisect_derivative([&](double theta) { return slope_at(dm, theta); }, lo, hi);
  }

  void pair_step(Index i, Index j, double theta) {
    if (theta == 0.0) return;
    margins_ += theta * labels_->cwiseProduct(a_->col(i) - a_->col(j));
    x_[i] += theta;
    x_[j] -= theta;
    image_key_ = -1;
    if (counter_.tick()) refresh();
  }

  /// 0.25 sigma_max(A)^2 with the 1.01 safety factor.
  double estimate_smoothness() const {
    return std::max(0.25 * squared_spectral_norm(*a_) * kSmoothnessSafety, kSmoothnessFloor);
  }
  double smoothness() const { return lipschitz_; }
  void set_smoothness(double lipschitz) {
    require(lipschitz > 0.0, "set_smoothness: L must be positive");
    lipschitz_ = lipschitz;
  }

  double cache_drift() const {
    const Vector fresh = labels_->cwiseProduct((*a_) * x_);
    return (fresh - margins_).norm() / std::max(1.0, fresh.norm());
  }

  void set_refresh_interval(int steps) { counter_.set_interval(steps); }

 private:
  static double loss(const Vector& margins) {
    double total = 0.0;
    for (Index k = 0; k < margins.size(); ++k) total += detail::softplus(-margins[k]);
    return total;
  }

  Vector gradient_from_margins(const Vector& margins) const {
    Vector weights(margins.size());
    for (Index k = 0; k < margins.size(); ++k)
      weights[k] = -(*labels_)[k] * detail::sigmoid(-margins[k]);
    return a_->transpose() * weights;
  }

  /// d/dalpha sum_k softplus(-(m_k + alpha dm_k))
  double slope_at(const Vector& dm, double alpha) const {
    double total = 0.0;
    for (Index k = 0; k < dm.size(); ++k)
      total -= detail::sigmoid(-(margins_[k] + alpha * dm[k])) * dm[k];
    return total;
  }

  /// Margins of v^i minus margins of x.
  const Vector& margin_change(const VertexPolytope& p, Index i) const {
    require(p.dim() == dim(), "objective/polytope dimension mismatch");
    if (image_key_ != i || image_owner_ != &p || image_size_ != p.size() || image_radius_ != p.radius()) {
      if (auto at = p.atom(i)) {
        delta_.noalias() = at->value * a_->col(at->coord);
      } else {
        delta_.noalias() = (*a_) * p.explicit_matrix().col(i);
      }
      delta_ = labels_->cwiseProduct(delta_) - margins_;
      image_key_ = i;
      image_owner_ = &p;
      image_size_ = p.size();
      image_radius_ = p.radius();
    }
    return delta_;
  }

  std::shared_ptr<const Matrix> a_;
  std::shared_ptr<const Vector> labels_;
  Vector x_;
  Vector margins_;
  double lipschitz_ = 1.0;
  RefreshCounter counter_;

  mutable Vector delta_;
  mutable Index image_key_ = -1;
  mutable const VertexPolytope* image_owner_ = nullptr;
  mutable Index image_size_ = 0;
  mutable double image_radius_ = 0.0;
};

}  // namespace polycd
