#pragma once

#include "polycd/polycd.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace polycd {

/// Largest finite backward step allowed when the weight of the vertex is 1.
inline constexpr double kGammaCap = 1e12;
inline constexpr double kDropSnap = 1e-14;
inline constexpr double kUnitWeightSlack = 4.0 * std::numeric_limits<double>::epsilon();
inline constexpr double kWeightSumTol = 1e-10;
inline constexpr double kReconstructionTol = 1e-6;

/// Convex weights with x = sum_j lambda_j v^j.
struct AwayState {
  Vector lambda;

  std::vector<Index> support() const {
    std::vector<Index> out;
    for (Index j = 0; j < lambda.size(); ++j)
      if (lambda[j] > 0.0) out.push_back(j);
    return out;
  }
};

/// lambda_i / (1 - lambda_i), infinite when lambda_i = 1.
inline double away_gamma(double lambda_i) {
  require(lambda_i >= 0.0 && lambda_i <= 1.0, "away_gamma: weight must lie in [0, 1]");
  if (lambda_i == 1.0) return kInf;
  return lambda_i / (1.0 - lambda_i);
}

/**
 * Clips negative weights, rescales to sum one and checks that the weights
 * still reproduce x. Throws ConsistencyError when they do not.
 */
inline AwayState weight_refresh(AwayState state, const Vector& x, const VertexPolytope& p) {
  require(state.lambda.size() == p.size(), "weight_refresh: weight vector must have length M");
  state.lambda = state.lambda.cwiseMax(0.0);
  const double total = state.lambda.sum();
  if (!(total > 0.0)) throw ConsistencyError("weight_refresh: weights vanished");
  state.lambda /= total;
  const double mismatch = (p.combine(state.lambda) - x).norm();
  if (mismatch > kReconstructionTol * (1.0 + x.norm()))
    throw ConsistencyError("weight_refresh: weights no longer reproduce the iterate (mismatch " +
                           std::to_string(mismatch) + ")");
  return state;
}

namespace detail {

/**
 * Weights stored as lambda = scale * mu so the rescaling in each step is
 * O(1). The running sum of mu is tracked to detect drift off the simplex.
 */
class ScaledWeights {
 public:
  explicit ScaledWeights(Vector lambda) : mu_(std::move(lambda)), scale_(1.0), mu_sum_(mu_.sum()) {}

  double operator[](Index j) const { return scale_ * mu_[j]; }
  double sum() const { return scale_ * mu_sum_; }

  /// lambda <- (1 - alpha) lambda, then lambda_i += alpha. `drop` writes an
  /// exact zero at i.
  void update(Index i, double alpha, bool drop) {
    if (alpha == 0.0) return;
    if (alpha == 1.0) {
      mu_.setZero();
      mu_[i] = 1.0;
      scale_ = 1.0;
      mu_sum_ = 1.0;
      return;
    }
    scale_ *= 1.0 - alpha;
    const double old = mu_[i];
    double next = drop ? 0.0 : old + alpha / scale_;
    if (next < 0.0) next = 0.0;
    mu_[i] = next;
    mu_sum_ += next - old;
    if (scale_ < 1e-150 || scale_ > 1e150) normalize_scale();
  }

  Vector materialize() const { return scale_ * mu_; }

  void assign(const Vector& lambda) {
    mu_ = lambda;
    scale_ = 1.0;
    mu_sum_ = mu_.sum();
  }

 private:
  void normalize_scale() {
    mu_ *= scale_;
    scale_ = 1.0;
    mu_sum_ = mu_.sum();
  }

  Vector mu_;
  double scale_;
  double mu_sum_;
};

}  // namespace detail

struct AwaySolveResult : SolveResult {
  AwayState state;
  Index drop_steps = 0;
  Index away_steps = 0;
};

/**
 * Cyclic polyhedral coordinate descent with away steps. The iterate is kept
 * as a convex combination of vertices; the step toward v^i may be negative
 * down to -lambda_i / (1 - lambda_i), which moves weight off v^i.
 */
template <SegmentObjective Obj>
AwaySolveResult polycdwa_solve(Obj& obj, const VertexPolytope& p, const SolveConfig& cfg = {}) {
  detail::validate(cfg);
  if (p.dim() != obj.dim())
    throw ContractViolation("objective/polytope dimension mismatch: objective has " + std::to_string(obj.dim()) +
                            ", polytope has " + std::to_string(p.dim()));
  require(cfg.weight_refresh_interval >= 1, "weight_refresh_interval must be at least 1");
  const auto order = detail::resolve_order(cfg, p.size());
  const double lipschitz = cfg.lipschitz > 0.0 ? cfg.lipschitz : obj.smoothness();
  const Index m = p.size();

  detail::Stopwatch clock;
  Vector lambda0;
  if (cfg.start_weights) {
    const Vector& w = *cfg.start_weights;
    require(w.size() == m, "start_weights must have length M");
    require(w.minCoeff() >= 0.0 && std::abs(w.sum() - 1.0) <= kWeightSumTol, "start_weights must lie in the simplex");
    lambda0 = w;
    obj.reset(p.combine(w));
  } else {
    require(!cfg.start.has_value(), "away-step solver needs start_weights for a non-vertex start");
    lambda0 = Vector::Zero(m);
    lambda0[0] = 1.0;
    obj.reset(p.vertex(0));
  }
  detail::ScaledWeights weights(lambda0);

  AwaySolveResult result;
  int since_refresh = 0;
  auto refresh_weights = [&](int t, Index inner) {
    AwayState s{weights.materialize()};
    s = weight_refresh(std::move(s), obj.x(), p);
    weights.assign(s.lambda);
    since_refresh = 0;
    if (cfg.weight_observer) cfg.weight_observer(t, inner, s.lambda, obj.x());
  };

  double f_prev = obj.value();
  result.trace.push_back({0, 0, f_prev, clock.seconds(), 0, count_nonzeros(obj.x())});

  for (int t = 0; t < cfg.max_outer; ++t) {
    Index inner = 0;
    for (Index i : order) {
      ++inner;
      ++result.inner_steps;
      const double li = std::clamp(weights[i], 0.0, 1.0);
      double alpha = 0.0;
      bool drop = false;
      // lambda_i = 1 means x = v^i: the segment is a point. A weight within
      // rounding of 1 (e.g. after the other weights were dropped) counts too.
      if (li < 1.0 - kUnitWeightSlack) {
        const double gamma = li / (1.0 - li);
        const double lo = -std::min(gamma, kGammaCap);
        bool skip = false;
        if (cfg.skip_inactive && li == 0.0) skip = obj.segment_slope(p, i, 0.0) >= 0.0;
        if (!skip) {
          alpha = detail::choose_alpha(obj, p, i, lo, 1.0, cfg, lipschitz);
          // A capped interval end is not a drop: the weight would stay positive.
          if (lo < 0.0 && gamma <= kGammaCap && alpha <= lo + kDropSnap * std::max(1.0, std::abs(lo))) {
            alpha = lo;
            drop = true;
          }
        }
      }
      if (alpha != 0.0) {
        obj.step(p, i, alpha);
        weights.update(i, alpha, drop);
        if (alpha < 0.0) ++result.away_steps;
        if (drop) ++result.drop_steps;
      }
      if (cfg.observer) cfg.observer(t, inner, i, alpha, obj.x());

      if (std::abs(weights.sum() - 1.0) > kWeightSumTol) {
        // One refresh is allowed to repair drift; a second failure in a row
        // means the weights cannot be trusted.
        refresh_weights(t, inner);
        if (std::abs(weights.sum() - 1.0) > kWeightSumTol)
          throw ConsistencyError("polycdwa_solve: weights left the simplex");
      } else if (++since_refresh >= cfg.weight_refresh_interval) {
        refresh_weights(t, inner);
      }
      if (cfg.verbose_trace && inner < m)
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
  refresh_weights(result.outer_iterations, 0);
  result.state.lambda = weights.materialize();
  result.x = obj.x();
  return result;
}

/**
 * Checks f(x^t) - f* <= (G / (1 + G))^t (f(x^0) - f*) with
 * G = 1 + 9 M L D^2 / (mu psi^2) for line search and
 * G = 2 + 16 M L D^2 / (mu psi^2) for the gradient rule.
 */
inline BoundReport check_linear_bound(const std::vector<double>& values, double f_star, Index m, double lipschitz,
                                      double diam, double mu, double psi, StepRule rule, double slack = 1e-12) {
  require(mu > 0.0 && psi > 0.0, "check_linear_bound: mu and psi must be positive");
  BoundReport report;
  if (values.empty()) return report;
  const double ratio = static_cast<double>(m) * lipschitz * diam * diam / (mu * psi * psi);
  const double g = rule == StepRule::ExactLineSearch ? 1.0 + 9.0 * ratio : 2.0 + 16.0 * ratio;
  const double q = g / (1.0 + g);
  const double gap0 = values[0] - f_star;
  const double tol = slack * std::max(1.0, std::abs(f_star));
  for (std::size_t t = 0; t < values.size(); ++t) {
    const double margin = std::pow(q, static_cast<double>(t)) * gap0 - (values[t] - f_star);
    report.margins.push_back(margin);
    if (margin < -tol && report.ok) {
      report.ok = false;
      report.first_violation = static_cast<int>(t);
    }
  }
  return report;
}

}  // namespace polycd
