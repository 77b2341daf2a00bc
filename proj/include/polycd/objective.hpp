#pragma once

#include "polycd/polytope.hpp"
#include "polycd/types.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>

namespace polycd {

/// Directional data for the segment from the iterate x toward a vertex v.
struct SegmentQuery {
  double slope = 0.0;        ///< <grad f(x), v - x>
  double sq_length = 0.0;    ///< ||v - x||^2
  /// Upper bound on the second derivative of f along the segment, used only
  /// by the optional directional-curvature step rule. Objectives without a
  /// sharper bound report L * sq_length.
  double curvature = 0.0;
};

/**
 * Smooth objective bound to a current iterate with cached auxiliary state.
 *
 * The segment operations (`segment`, `line_search`, `step`) cost O(n + d)
 * for one-hot vertices. `gradient`, `value_at` and `gradient_at` are full
 * evaluations used by baselines and verifiers.
 */
template <class O>
concept SegmentObjective = requires(O& o, const O& c, const VertexPolytope& p, Index i, double a,
                                    const Vector& x) {
  { c.dim() } -> std::convertible_to<Index>;
  { c.x() } -> std::convertible_to<const Vector&>;
  { c.value() } -> std::convertible_to<double>;
  { c.segment(p, i) } -> std::same_as<SegmentQuery>;
  { c.line_search(p, i, a, a) } -> std::convertible_to<double>;
  { c.segment_slope(p, i, a) } -> std::convertible_to<double>;
  { o.step(p, i, a) };
  { o.reset(x) };
  { o.refresh() };
  { c.gradient() } -> std::convertible_to<Vector>;
  { c.value_at(x) } -> std::convertible_to<double>;
  { c.gradient_at(x) } -> std::convertible_to<Vector>;
  { c.smoothness() } -> std::convertible_to<double>;
};

/// Objectives over the standard simplex that can also move along e_i - e_j
/// (used by the randomized two-coordinate baseline).
template <class O>
concept PairwiseObjective = SegmentObjective<O> && requires(O& o, const O& c, Index i, double a) {
  { c.pair_line_search(i, i, a, a) } -> std::convertible_to<double>;
  { o.pair_step(i, i, a) };
};

inline constexpr double kSmoothnessFloor = 1e-12;
inline constexpr double kSmoothnessSafety = 1.01;
inline constexpr int kDefaultRefreshInterval = 1000;

/**
 * Minimiser over [lo, hi] of alpha * slope + (L alpha^2 / 2) * sq_length.
 * A zero-length segment makes the model linear: lo when slope > 0, hi when
 * slope < 0, and the step closest to zero when it is flat.
 */
inline double grad_step_alpha(const SegmentQuery& q, double lipschitz, double lo, double hi) {
  require(lipschitz > 0.0, "grad_step_alpha: L must be positive");
  require(lo <= hi, "grad_step_alpha: empty interval");
  if (q.sq_length <= 0.0) {
    if (q.slope == 0.0) return std::clamp(0.0, lo, hi);
    return q.slope > 0.0 ? lo : hi;
  }
  return std::clamp(-q.slope / (lipschitz * q.sq_length), lo, hi);
}

inline constexpr double kBisectionWidth = 1e-12;
inline constexpr int kBisectionMaxHalvings = 200;

/**
 * Root of a nondecreasing derivative on [lo, hi], bracketed until the
 * bracket is narrower than kBisectionWidth. Steps are Illinois-modified
 * regula falsi; a plain bisection is forced whenever three steps in a row
 * fail to halve the bracket. Returns lo when the derivative is already
 * nonnegative there and hi when it is still nonpositive at the right end.
 */
inline double bisect_derivative(const std::function<double(double)>& slope, double lo, double hi) {
  require(lo <= hi, "line_search: empty interval");
  double ga = slope(lo);
  if (ga >= 0.0) return lo;
  double gb = slope(hi);
  if (gb <= 0.0) return hi;
  double a = lo;
  double b = hi;
  int side = 0;
  int slow = 0;
  for (int k = 0; k < 3 * kBisectionMaxHalvings && b - a > kBisectionWidth; ++k) {
    const double width = b - a;
    double x = b - gb * (b - a) / (gb - ga);
    if (slow >= 3 || !(x > a && x < b)) {
      x = 0.5 * (a + b);
      slow = 0;
    }
    if (x <= a || x >= b) break;
    const double g = slope(x);
    if (g == 0.0) return x;
    if (g > 0.0) {
      b = x;
      gb = g;
      if (side == 1) ga *= 0.5;
      side = 1;
    } else {
      a = x;
      ga = g;
      if (side == -1) gb *= 0.5;
      side = -1;
    }
    slow = (b - a > 0.5 * width) ? slow + 1 : 0;
  }
  return 0.5 * (a + b);
}

/// Minimiser over [lo, hi] of a convex quadratic with the given slope and
/// curvature at 0. A flat direction returns lo.
inline double quadratic_line_min(double slope, double curvature, double lo, double hi) {
  require(lo <= hi, "line_search: empty interval");
  if (curvature <= 0.0) {
    if (slope < 0.0) return hi;
    return lo;
  }
  return std::clamp(-slope / curvature, lo, hi);
}

/// Largest eigenvalue of the PSD operator `apply` by power iteration.
inline double power_iteration(const std::function<Vector(const Vector&)>& apply, Index dim,
                              int iterations = 100) {
  if (dim == 0) return 0.0;
  Vector v = Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  // A slightly perturbed start avoids an exact zero overlap with the top
  // eigenvector for structured inputs.
  for (Index j = 0; j < dim; ++j) v[j] += 1e-3 * std::sin(static_cast<double>(j + 1));
  v.normalize();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm;
  }
  return std::max(lambda, (apply(v)).norm());
}

/// sigma_max(A)^2 by power iteration on A^T A.
inline double squared_spectral_norm(const Matrix& a, int iterations = 100) {
  return power_iteration([&](const Vector& v) -> Vector { return a.transpose() * (a * v); }, a.cols(),
                         iterations);
}

/// Counts segment steps and triggers a full cache rebuild periodically.
class RefreshCounter {
 public:
  explicit RefreshCounter(int interval = kDefaultRefreshInterval) : interval_(interval) {}
  /// True when the caller should rebuild its cache now.
  bool tick() {
    if (interval_ <= 0) return false;
    if (++count_ >= interval_) {
      count_ = 0;
      return true;
    }
    return false;
  }
  void reset() { count_ = 0; }
  int interval() const { return interval_; }
  void set_interval(int interval) { interval_ = interval; }

 private:
  int interval_;
  int count_ = 0;
};

}  // namespace polycd
