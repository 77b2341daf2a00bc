#pragma once

#include "polycd/polycd_away.hpp"
#include "polycd/rng.hpp"

#include <cstdint>
#include <deque>

namespace polycd {

enum class BaselineMethod { FW, AFW, FISTA, TwoCD };

inline std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::FW: return "fw";
    case BaselineMethod::AFW: return "afw";
    case BaselineMethod::FISTA: return "fista";
    case BaselineMethod::TwoCD: return "2cd";
  }
  return "?";
}

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::FW;
  int max_iter = 1000;
  /// Stop when (f_{k-window} - f_k) / max(|f_{k-window}|, 1) < window_tol.
  /// A window of 0 disables the rule.
  int window = 50;
  double window_tol = 1e-8;
  std::uint64_t seed = 0;
  /// FW-gap threshold for FW and AFW.
  double fw_gap_tol = 1e-12;
  /// Record every k-th iteration (the last one is always recorded).
  int trace_every = 1;
  std::optional<Vector> start;
  double lipschitz = 0.0;
  /// Wall-clock budget in seconds, checked once per iteration; 0 disables it.
  double max_seconds = 0.0;
};

namespace detail {

class WindowRule {
 public:
  WindowRule(int window, double tol) : window_(window), tol_(tol) {}

  /// Feeds f_k; true when the stagnation rule fires. The rule compares
  /// best-so-far values, so it also applies to nonmonotone methods.
  bool push(double f) {
    if (window_ <= 0) return false;
    best_ = std::min(best_, f);
    history_.push_back(best_);
    if (static_cast<int>(history_.size()) <= window_) return false;
    const double old = history_.front();
    history_.pop_front();
    return (old - best_) / std::max(std::abs(old), 1.0) < tol_;
  }

 private:
  int window_;
  double tol_;
  double best_ = kInf;
  std::deque<double> history_;
};

inline void validate(const BaselineConfig& cfg) {
  require(cfg.max_iter >= 1, "max_iter must be at least 1");
  require(cfg.window >= 0, "window must be nonnegative");
  require(cfg.trace_every >= 1, "trace_every must be at least 1");
  require(cfg.max_seconds >= 0.0, "max_seconds must be nonnegative");
}

template <SegmentObjective Obj>
void check_dims(const Obj& obj, const VertexPolytope& p) {
  if (p.dim() != obj.dim())
    throw ContractViolation("objective/polytope dimension mismatch: objective has " + std::to_string(obj.dim()) +
                            ", polytope has " + std::to_string(p.dim()));
}

/// Appends a trace record when due; returns true when the loop should stop.
template <SegmentObjective Obj>
bool record_iteration(SolveResult& result, const Obj& obj, const BaselineConfig& cfg, WindowRule& rule, int k,
                      double f, const Stopwatch& clock) {
  result.outer_iterations = k;
  const bool stop = rule.push(f);
  const double now = clock.seconds();
  const bool out_of_time = cfg.max_seconds > 0.0 && now >= cfg.max_seconds;
  if (k % cfg.trace_every == 0 || stop || out_of_time || k == cfg.max_iter)
    result.trace.push_back({k, 0, f, now, k, count_nonzeros(obj.x())});
  if (stop) result.converged = true;
  return stop || out_of_time;
}

/// Vertex minimizing <g, v>, lowest index on ties.
inline Index fw_vertex(const VertexPolytope& p, const Vector& g) {
  Index best = 0;
  double best_val = p.dot(0, g);
  for (Index i = 1; i < p.size(); ++i) {
    const double v = p.dot(i, g);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Frank-Wolfe with exact line search toward the linear-minimization vertex.
template <SegmentObjective Obj>
SolveResult fw_solve(Obj& obj, const VertexPolytope& p, const BaselineConfig& cfg = {}) {
  detail::validate(cfg);
  detail::check_dims(obj, p);
  detail::Stopwatch clock;
  if (cfg.start) {
    require(p.contains(*cfg.start, 1e-8), "start point must lie in the polytope");
    obj.reset(*cfg.start);
  } else {
    obj.reset(p.vertex(0));
  }
  SolveResult result;
  detail::WindowRule rule(cfg.window, cfg.window_tol);
  result.trace.push_back({0, 0, obj.value(), clock.seconds(), 0, count_nonzeros(obj.x())});
  rule.push(obj.value());
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector g = obj.gradient();
    const Index v = detail::fw_vertex(p, g);
    const double gap = g.dot(obj.x()) - p.dot(v, g);
    if (gap <= cfg.fw_gap_tol) {
      result.converged = true;
      break;
    }
    obj.step(p, v, obj.line_search(p, v, 0.0, 1.0));
    ++result.inner_steps;
    if (detail::record_iteration(result, obj, cfg, rule, k, obj.value(), clock)) break;
  }
  result.x = obj.x();
  return result;
}

/**
 * Away-step Frank-Wolfe. Weights are kept as in the away-step coordinate
 * solver; an away step from vertex a is the segment step toward a with a
 * negative coefficient in [-lambda_a / (1 - lambda_a), 0].
 */
template <SegmentObjective Obj>
AwaySolveResult afw_solve(Obj& obj, const VertexPolytope& p, const BaselineConfig& cfg = {}) {
  detail::validate(cfg);
  detail::check_dims(obj, p);
  require(!cfg.start.has_value(), "afw_solve starts at the first vertex");
  detail::Stopwatch clock;
  const Index m = p.size();
  Vector lambda0 = Vector::Zero(m);
  lambda0[0] = 1.0;
  obj.reset(p.vertex(0));
  detail::ScaledWeights weights(lambda0);
  // Active set, kept alongside the weights so the away search is over the
  // support only.
  std::vector<Index> active{0};
  std::vector<char> in_active(static_cast<std::size_t>(m), 0);
  in_active[0] = 1;

  AwaySolveResult result;
  detail::WindowRule rule(cfg.window, cfg.window_tol);
  result.trace.push_back({0, 0, obj.value(), clock.seconds(), 0, count_nonzeros(obj.x())});
  rule.push(obj.value());
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector g = obj.gradient();
    const double gx = g.dot(obj.x());
    const Index s = detail::fw_vertex(p, g);
    const double fw_gap = gx - p.dot(s, g);
    if (fw_gap <= cfg.fw_gap_tol) {
      result.converged = true;
      break;
    }
    // Away vertex: largest <g, v> over the support, lowest index on ties.
    std::erase_if(active, [&](Index j) {
      if (weights[j] > 0.0) return false;
      in_active[static_cast<std::size_t>(j)] = 0;
      return true;
    });
    std::sort(active.begin(), active.end());
    Index a = active.front();
    double a_val = p.dot(a, g);
    for (Index j : active) {
      const double val = p.dot(j, g);
      if (val > a_val) {
        a_val = val;
        a = j;
      }
    }
    const double away_gap = a_val - gx;
    double alpha = 0.0;
    Index target = s;
    bool drop = false;
    if (fw_gap >= away_gap) {
      alpha = obj.line_search(p, s, 0.0, 1.0);
    } else {
      target = a;
      const double la = std::clamp(weights[a], 0.0, 1.0);
      // With la within rounding of 1 the iterate is v^a and the away segment is a point.
      if (la < 1.0 - kUnitWeightSlack) {
        const double gamma = la / (1.0 - la);
        const double lo = -std::min(gamma, kGammaCap);
        alpha = obj.line_search(p, a, lo, 0.0);
        if (gamma <= kGammaCap && alpha <= lo + kDropSnap * std::max(1.0, std::abs(lo))) {
          alpha = lo;
          drop = true;
          ++result.drop_steps;
        }
      }
      ++result.away_steps;
    }
    if (alpha != 0.0) {
      obj.step(p, target, alpha);
      weights.update(target, alpha, drop);
      if (alpha == 1.0) {
        for (Index j : active) in_active[static_cast<std::size_t>(j)] = 0;
        active.clear();
      }
      if (!in_active[static_cast<std::size_t>(target)] && weights[target] > 0.0) {
        active.push_back(target);
        in_active[static_cast<std::size_t>(target)] = 1;
      }
    }
    ++result.inner_steps;
    if (std::abs(weights.sum() - 1.0) > kWeightSumTol) {
      AwayState st = weight_refresh(AwayState{weights.materialize()}, obj.x(), p);
      weights.assign(st.lambda);
    }
    if (detail::record_iteration(result, obj, cfg, rule, k, obj.value(), clock)) break;
  }
  result.state = weight_refresh(AwayState{weights.materialize()}, obj.x(), p);
  result.x = obj.x();
  return result;
}

/// Accelerated projected gradient with fixed step 1/L.
template <SegmentObjective Obj>
SolveResult fista_solve(Obj& obj, const VertexPolytope& p, const BaselineConfig& cfg = {}) {
  detail::validate(cfg);
  detail::check_dims(obj, p);
  require(p.structured(), "fista_solve needs a simplex or l1-ball");
  const double lipschitz = cfg.lipschitz > 0.0 ? cfg.lipschitz : obj.smoothness();
  detail::Stopwatch clock;
  Vector x = cfg.start ? p.project(*cfg.start) : p.vertex(0);
  obj.reset(x);
  Vector y = x;
  double t = 1.0;
  SolveResult result;
  detail::WindowRule rule(cfg.window, cfg.window_tol);
  result.trace.push_back({0, 0, obj.value(), clock.seconds(), 0, count_nonzeros(obj.x())});
  rule.push(obj.value());
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector next = p.project(y - obj.gradient_at(y) / lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    t = t_next;
    obj.reset(x);
    ++result.inner_steps;
    if (detail::record_iteration(result, obj, cfg, rule, k, obj.value(), clock)) break;
  }
  result.x = obj.x();
  return result;
}

/**
 * Randomized two-coordinate descent on the standard simplex: each
 * iteration draws a distinct pair (i, j) and minimizes exactly along
 * e_i - e_j over theta in [-u_i, u_j].
 */
template <PairwiseObjective Obj>
SolveResult twocd_solve(Obj& obj, const VertexPolytope& p, const BaselineConfig& cfg = {}) {
  detail::validate(cfg);
  detail::check_dims(obj, p);
  require(p.kind() == PolytopeKind::StandardSimplex, "twocd_solve needs the standard simplex");
  require(p.size() >= 2, "twocd_solve needs at least two coordinates");
  detail::Stopwatch clock;
  if (cfg.start) {
    require(p.contains(*cfg.start, 1e-8), "start point must lie in the polytope");
    obj.reset(*cfg.start);
  } else {
    obj.reset(p.vertex(0));
  }
  Rng rng(cfg.seed);
  const auto m = static_cast<std::uint64_t>(p.size());
  SolveResult result;
  detail::WindowRule rule(cfg.window, cfg.window_tol);
  result.trace.push_back({0, 0, obj.value(), clock.seconds(), 0, count_nonzeros(obj.x())});
  rule.push(obj.value());
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const auto i = static_cast<Index>(rng.index(m));
    auto j = static_cast<Index>(rng.index(m - 1));
    if (j >= i) ++j;
    const double lo = -obj.x()[i];
    const double hi = obj.x()[j];
    if (hi > lo) obj.pair_step(i, j, obj.pair_line_search(i, j, lo, hi));
    ++result.inner_steps;
    if (detail::record_iteration(result, obj, cfg, rule, k, obj.value(), clock)) break;
  }
  result.x = obj.x();
  return result;
}

/// Matrix C [A, -A] for the simplex form of the l1-ball problem.
inline Matrix lift_l1_to_simplex(const Matrix& a, double radius) {
  Matrix lifted(a.rows(), 2 * a.cols());
  lifted.leftCols(a.cols()) = radius * a;
  lifted.rightCols(a.cols()) = -radius * a;
  return lifted;
}

/// x = C (u_+ - u_-) for u in the simplex of size 2d.
inline Vector unlift_simplex_point(const Vector& u, double radius) {
  require(u.size() % 2 == 0, "unlift_simplex_point: length must be even");
  const Index d = u.size() / 2;
  return radius * (u.head(d) - u.tail(d));
}

}  // namespace polycd
