#pragma once

#include "polycd/objective.hpp"
#include "polycd/polytope.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace polycd {

enum class StepRule { ExactLineSearch, OneDimGradient };

inline std::string to_string(StepRule rule) {
  return rule == StepRule::ExactLineSearch ? "line-search" : "gradient";
}

/// Observer for every inner iterate x^{t,i} (i = 1..M) after it is formed.
using StepObserver = std::function<void(int t, Index inner, Index vertex, double alpha, const Vector& x)>;

struct SolveConfig {
  StepRule step_rule = StepRule::ExactLineSearch;
  int max_outer = 100;
  /// Stop when (f(x^t) - f(x^{t+1})) / max(|f(x^t)|, 1) falls below this.
  double rel_improve_tol = 1e-8;
  /// Vertex visit order within each outer pass; empty means 0, 1, ..., M-1.
  std::vector<Index> visit_order;
  /// Starting point. Empty means the first vertex. The away-step solver needs
  /// `start_weights` instead when starting off a vertex.
  std::optional<Vector> start;
  std::optional<Vector> start_weights;
  /// Smoothness constant for the gradient rule; 0 uses the objective's.
  double lipschitz = 0.0;
  /// Use the objective's directional curvature instead of L ||v - x||^2 in
  /// the gradient rule.
  bool directional_curvature = false;
  /// Record a trace entry after every inner step, not only at outer
  /// boundaries.
  bool verbose_trace = false;
  StepObserver observer;

  // Away-step variant only.
  /// Skip vertices with zero weight whose segment slope is nonnegative.
  bool skip_inactive = false;
  int weight_refresh_interval = 1000;
  /// Called after every weight refresh with the refreshed weights.
  std::function<void(int t, Index inner, const Vector& lambda, const Vector& x)> weight_observer;
};

struct TraceRecord {
  int t = 0;
  /// Inner steps completed within outer iteration t (0 at boundaries).
  Index inner = 0;
  double f_value = 0.0;
  double elapsed = 0.0;
  Index inner_steps_taken = 0;
  Index nnz = 0;
};

struct SolveResult {
  Vector x;
  std::vector<TraceRecord> trace;
  int outer_iterations = 0;
  bool converged = false;
  Index inner_steps = 0;

  /// Boundary records only (x^t = x^{t,0}).
  std::vector<double> outer_values() const {
    std::vector<double> out;
    for (const auto& r : trace)
      if (r.inner == 0) out.push_back(r.f_value);
    return out;
  }
};

namespace detail {

inline std::vector<Index> resolve_order(const SolveConfig& cfg, Index m) {
  if (cfg.visit_order.empty()) {
    std::vector<Index> order(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    return order;
  }
  require(static_cast<Index>(cfg.visit_order.size()) == m, "visit_order must be a permutation of the vertices");
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (Index i : cfg.visit_order) {
    require(i >= 0 && i < m && !seen[static_cast<std::size_t>(i)],
            "visit_order must be a permutation of the vertices");
    seen[static_cast<std::size_t>(i)] = true;
  }
  return cfg.visit_order;
}

inline void validate(const SolveConfig& cfg) {
  require(cfg.max_outer >= 1, "max_outer must be at least 1");
  require(cfg.rel_improve_tol >= 0.0, "rel_improve_tol must be nonnegative");
}

/// Step size on [lo, hi] under the configured rule.
template <SegmentObjective Obj>
double choose_alpha(const Obj& obj, const VertexPolytope& p, Index i, double lo, double hi,
                    const SolveConfig& cfg, double lipschitz) {
  if (cfg.step_rule == StepRule::ExactLineSearch) return obj.line_search(p, i, lo, hi);
  const SegmentQuery q = obj.segment(p, i);
  if (cfg.directional_curvature) {
    if (q.sq_length <= 0.0) return q.slope >= 0.0 ? lo : hi;
    return quadratic_line_min(q.slope, q.curvature, lo, hi);
  }
  return grad_step_alpha(q, lipschitz, lo, hi);
}

inline double relative_improvement(double before, double after) {
  return (before - after) / std::max(std::abs(before), 1.0);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/**
 * Cyclic polyhedral coordinate descent. Each outer pass visits every vertex
 * in order and moves the iterate along the segment toward it with a step in
 * [0, 1] chosen by exact line search or by the one-dimensional gradient
 * model with constant L.
 */
template <SegmentObjective Obj>
SolveResult polycd_solve(Obj& obj, const VertexPolytope& p, const SolveConfig& cfg = {}) {
  detail::validate(cfg);
  if (p.dim() != obj.dim())
    throw ContractViolation("objective/polytope dimension mismatch: objective has " + std::to_string(obj.dim()) +
                            ", polytope has " + std::to_string(p.dim()));
  const auto order = detail::resolve_order(cfg, p.size());
  const double lipschitz = cfg.lipschitz > 0.0 ? cfg.lipschitz : obj.smoothness();

  detail::Stopwatch clock;
  if (cfg.start) {
    require(cfg.start->size() == p.dim(), "start point dimension mismatch");
    require(p.contains(*cfg.start, 1e-8), "start point must lie in the polytope");
    obj.reset(*cfg.start);
  } else {
    obj.reset(p.vertex(0));
  }

  SolveResult result;
  double f_prev = obj.value();
  result.trace.push_back({0, 0, f_prev, clock.seconds(), 0, count_nonzeros(obj.x())});

  for (int t = 0; t < cfg.max_outer; ++t) {
    Index inner = 0;
    for (Index i : order) {
      const double alpha = detail::choose_alpha(obj, p, i, 0.0, 1.0, cfg, lipschitz);
      obj.step(p, i, alpha);
      ++inner;
      ++result.inner_steps;
      if (cfg.observer) cfg.observer(t, inner, i, alpha, obj.x());
      if (cfg.verbose_trace && inner < p.size())
        result.trace.push_back({t, inner, obj.value(), clock.seconds(), result.inner_steps, count_nonzeros(obj.x())});
    }
    const double f_now = obj.value();
    result.outer_iterations = t + 1;
    result.trace.push_back({t + 1, 0, f_now, clock.seconds(), result.inner_steps, count_nonzeros(obj.x())});
    const bool stop = detail::relative_improvement(f_prev, f_now) < cfg.rel_improve_tol;
    f_prev = f_now;
    if (stop) {
      result.converged = true;
      break;
    }
  }
  result.x = obj.x();
  return result;
}

/// Outcome of comparing a gap sequence against a theoretical envelope.
struct BoundReport {
  bool ok = true;
  std::optional<int> first_violation;
  /// bound(t) - gap(t) for every checked t.
  std::vector<double> margins;
};

/**
 * Checks f(x^t) - f* <= max{f(x^1) - f*, K M L D^2} / t for t >= 1 with
 * K = 4 (line search) or 16 (gradient rule). `values[t]` is f(x^t).
 * `slack` absorbs floating-point noise in the gaps.
 */
inline BoundReport check_sublinear_bound(const std::vector<double>& values, double f_star, Index m, double lipschitz,
                                         double diam, StepRule rule, double slack = 1e-12) {
  BoundReport report;
  if (values.size() < 2) return report;
  const double k = rule == StepRule::ExactLineSearch ? 4.0 : 16.0;
  const double constant = k * static_cast<double>(m) * lipschitz * diam * diam;
  const double head = std::max(values[1] - f_star, constant);
  const double tol = slack * std::max(1.0, std::abs(f_star));
  for (std::size_t t = 1; t < values.size(); ++t) {
    const double margin = head / static_cast<double>(t) - (values[t] - f_star);
    report.margins.push_back(margin);
    if (margin < -tol && report.ok) {
      report.ok = false;
      report.first_violation = static_cast<int>(t);
    }
  }
  return report;
}

}  // namespace polycd
