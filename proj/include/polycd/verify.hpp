#pragma once

#include "polycd/objective.hpp"
#include "polycd/polytope.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace polycd {

/// FW gap <grad f(x), x - v_FW>, an upper bound on f(x) - f*.
inline double frank_wolfe_gap(const VertexPolytope& p, const Vector& x, const Vector& grad) {
  double best = kInf;
  for (Index i = 0; i < p.size(); ++i) best = std::min(best, p.dot(i, grad));
  return grad.dot(x) - best;
}

struct ReferenceOptions {
  /// Stop when ||x - P(x - grad / L)|| <= tol * max(1, ||x||).
  double tol = 1e-12;
  long max_iter = 1000000;
  /// Grid cross-check for polytopes of dimension at most 3.
  bool grid_check = true;
  /// Slack for the grid comparison, relative to max(1, |f|).
  double grid_slack = 1e-9;
  /// Backtracking on the local smoothness instead of the fixed step 1/L.
  /// The trial constant never exceeds the objective's L.
  bool adaptive_step = false;
};

struct ReferenceResult {
  Vector x;
  double f = 0.0;
  double residual = 0.0;
  double fw_gap = 0.0;
  long iterations = 0;
  bool converged = false;
  std::optional<double> grid_value;
  /// False when the grid found a point better than x beyond the slack.
  bool grid_consistent = true;
};

namespace detail {

/// Best value on a grid over a k-dimensional parameter box, refined twice
/// around the incumbent.
inline double refined_grid_min(Index k, double lo, double hi,
                               const std::function<std::optional<double>(const Vector&)>& eval) {
  Vector lower = Vector::Constant(k, lo);
  Vector upper = Vector::Constant(k, hi);
  double best = kInf;
  Vector best_at = 0.5 * (lower + upper);
  for (int level = 0; level < 3; ++level) {
    const int pts = level == 0 ? 101 : 41;
    const Vector h = (upper - lower) / static_cast<double>(pts - 1);
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    Vector theta(k);
    while (true) {
      for (Index a = 0; a < k; ++a) theta[a] = lower[a] + h[a] * idx[static_cast<std::size_t>(a)];
      if (auto v = eval(theta); v && *v < best) {
        best = *v;
        best_at = theta;
      }
      Index a = 0;
      while (a < k && ++idx[static_cast<std::size_t>(a)] == pts) idx[static_cast<std::size_t>(a++)] = 0;
      if (a == k) break;
    }
    lower = (best_at - 2.0 * h).cwiseMax(lo);
    upper = (best_at + 2.0 * h).cwiseMin(hi);
  }
  return best;
}

template <SegmentObjective Obj>
std::optional<double> grid_min(const Obj& obj, const VertexPolytope& p) {
  if (p.kind() == PolytopeKind::L1Ball && p.dim() <= 3) {
    const double c = p.radius();
    return refined_grid_min(p.dim(), -c, c, [&](const Vector& x) -> std::optional<double> {
      if (x.lpNorm<1>() > c) return std::nullopt;
      return obj.value_at(x);
    });
  }
  if (p.kind() != PolytopeKind::L1Ball && p.size() <= 3 && p.dim() <= 3) {
    const Index k = p.size() - 1;
    if (k == 0) return obj.value_at(p.vertex(0));
    return refined_grid_min(k, 0.0, 1.0, [&](const Vector& theta) -> std::optional<double> {
      if (theta.sum() > 1.0) return std::nullopt;
      Vector w(p.size());
      w.head(k) = theta;
      w[k] = 1.0 - theta.sum();
      return obj.value_at(p.combine(w));
    });
  }
  return std::nullopt;
}

}  // namespace detail

/**
 * High-accuracy minimizer by accelerated projected gradient with step 1/L
 * and function-value restart. Explicit vertex lists are handled in weight
 * space (minimize f(V w) over the simplex). The FW gap at the returned
 * point is reported as a certificate.
 */
template <SegmentObjective Obj>
ReferenceResult reference_solve(const Obj& obj, const VertexPolytope& p, const ReferenceOptions& opt = {}) {
  require(opt.tol > 0.0, "reference_solve: tol must be positive");
  require(p.dim() == obj.dim(), "reference_solve: objective/polytope dimension mismatch");
  const bool weights_space = !p.structured();
  const Matrix* v = weights_space ? &p.explicit_matrix() : nullptr;
  const double lip_x = obj.smoothness();
  const double lip = weights_space ? lip_x * std::max(squared_spectral_norm(*v), 1e-300) : lip_x;

  auto to_x = [&](const Vector& z) -> Vector { return weights_space ? Vector((*v) * z) : z; };
  auto value = [&](const Vector& z) { return obj.value_at(to_x(z)); };
  auto grad = [&](const Vector& z) -> Vector {
    const Vector g = obj.gradient_at(to_x(z));
    return weights_space ? Vector(v->transpose() * g) : g;
  };
  auto project = [&](const Vector& y) -> Vector { return weights_space ? project_simplex(y) : p.project(y); };

  Vector z = weights_space ? Vector(Vector::Unit(p.size(), 0)) : p.vertex(0);
  double fz = value(z);
  Vector y = z;
  double t = 1.0;
  double step_lip = lip;
  ReferenceResult out;
  bool stalled = false;
  for (long k = 1; k <= opt.max_iter; ++k) {
    out.iterations = k;
    const Vector gy = grad(y);
    Vector next;
    double fnext = 0.0;
    if (opt.adaptive_step) {
      const double fy = value(y);
      step_lip = std::max(0.5 * step_lip, kSmoothnessFloor);
      while (true) {
        next = project(y - gy / step_lip);
        fnext = value(next);
        const Vector diff = next - y;
        const double model = fy + gy.dot(diff) + 0.5 * step_lip * diff.squaredNorm();
        if (fnext <= model + 1e-14 * std::max(1.0, std::abs(fy)) || step_lip >= lip) break;
        step_lip = std::min(2.0 * step_lip, lip);
      }
    } else {
      next = project(y - gy / lip);
      fnext = value(next);
    }
    if (fnext > fz) {
      // A plain gradient step from the incumbent cannot increase f; if it
      // does, rounding dominates and the incumbent is final.
      if (t == 1.0) {
        stalled = true;
        break;
      }
      // Restart momentum from the incumbent.
      t = 1.0;
      y = z;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - z);
    const double move = (next - z).norm();
    z = next;
    fz = fnext;
    t = t_next;
    if (move <= opt.tol * std::max(1.0, z.norm()) || k % 50 == 0) {
      const Vector gz = grad(z);
      const double res = (z - project(z - gz / step_lip)).norm() / std::max(1.0, z.norm());
      if (res <= opt.tol) {
        out.converged = true;
        break;
      }
    }
  }
  // Once f stalls at rounding, momentum steps stop being accepted while z can
  // still be off by ~sqrt(eps). Plain projected steps keep contracting in x.
  Vector gz = grad(z);
  out.residual = (z - project(z - gz / lip)).norm() / std::max(1.0, z.norm());
  const double tie = 1e-15 * std::max(1.0, std::abs(fz));
  for (int k = 0; stalled && k < 200 && out.residual > opt.tol; ++k) {
    const Vector next = project(z - gz / lip);
    const double fnext = value(next);
    if (fnext > fz + tie) break;
    const Vector gnext = grad(next);
    const double res = (next - project(next - gnext / lip)).norm() / std::max(1.0, next.norm());
    if (res >= out.residual) break;
    z = next;
    fz = std::min(fz, fnext);
    gz = gnext;
    out.residual = res;
  }
  if (out.residual <= opt.tol) out.converged = true;
  out.x = to_x(z);
  out.f = obj.value_at(out.x);
  out.fw_gap = frank_wolfe_gap(p, out.x, obj.gradient_at(out.x));
  if (opt.grid_check) {
    out.grid_value = detail::grid_min(obj, p);
    if (out.grid_value)
      out.grid_consistent = *out.grid_value >= out.f - opt.grid_slack * std::max(1.0, std::abs(out.f));
  }
  return out;
}

struct Decomposition {
  Vector p;
  Vector q;
  double eta = 0.0;
};

/// a - b = (eta / 2)(p - q) with p, q in the simplex and supp(p) in supp(a).
inline Decomposition simplex_decompose(const Vector& a, const Vector& b, double tol = 1e-12) {
  require(a.size() == b.size(), "simplex_decompose: length mismatch");
  require(a.minCoeff() >= -tol && std::abs(a.sum() - 1.0) <= tol, "simplex_decompose: a must lie in the simplex");
  require(b.minCoeff() >= -tol && std::abs(b.sum() - 1.0) <= tol, "simplex_decompose: b must lie in the simplex");
  const Vector diff = a - b;
  const double eta = diff.lpNorm<1>();
  if (eta == 0.0) return {a, a, 0.0};
  return {2.0 * diff.cwiseMax(0.0) / eta, 2.0 * (-diff).cwiseMax(0.0) / eta, eta};
}

enum class LemmaOutcome { Holds, PremiseFailed, ConclusionFailed };

inline std::string to_string(LemmaOutcome o) {
  switch (o) {
    case LemmaOutcome::Holds: return "holds";
    case LemmaOutcome::PremiseFailed: return "premise-failed";
    case LemmaOutcome::ConclusionFailed: return "conclusion-failed";
  }
  return "?";
}

struct LemmaReport {
  LemmaOutcome outcome = LemmaOutcome::Holds;
  /// 1-based index of the first failing term, if any.
  std::optional<std::size_t> index;
};

/**
 * For a_1, a_2, ... (a[0] is a_1): checks the premise a_k >= 0 and
 * a_k - a_{k+1} >= lambda a_{k+1}^2, then the conclusion
 * a_k <= max{a_1, 2 / lambda} / k. `slack` is an absolute allowance for
 * rounding in both.
 */
inline LemmaReport check_sequence_lemma(const std::vector<double>& a, double lambda, double slack = 0.0) {
  require(lambda > 0.0, "check_sequence_lemma: lambda must be positive");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < 0.0) return {LemmaOutcome::PremiseFailed, k + 1};
    if (k + 1 < a.size() && a[k] - a[k + 1] < lambda * a[k + 1] * a[k + 1] - slack)
      return {LemmaOutcome::PremiseFailed, k + 1};
  }
  if (a.empty()) return {};
  const double head = std::max(a[0], 2.0 / lambda);
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > head / static_cast<double>(k + 1) + slack) return {LemmaOutcome::ConclusionFailed, k + 1};
  return {};
}

/**
 * Both telescoping identities relating <grad f(x^j), x^j - z> to
 * <grad f(x^i), x^i - z> (and to <grad f(x^{i-1}), x^i - z>) along a
 * sequence x^0..x^M, for the given 0 < i < j (first form also allows
 * i = 0). Returns the larger absolute discrepancy.
 */
inline double reduction_discrepancy(const std::vector<Vector>& grads, const std::vector<Vector>& xs, const Vector& z,
                                    std::size_t i, std::size_t j) {
  require(grads.size() == xs.size(), "reduction identity: sequence lengths differ");
  require(i < j && j < xs.size(), "reduction identity: need i < j within the sequence");
  const double lhs1 = grads[j].dot(xs[j] - z) - grads[i].dot(xs[i] - z);
  double rhs1 = 0.0;
  for (std::size_t k = i + 1; k <= j; ++k)
    rhs1 += grads[k].dot(xs[k] - xs[k - 1]) + (grads[k] - grads[k - 1]).dot(xs[k - 1] - z);
  double err = std::abs(lhs1 - rhs1);
  if (i >= 1) {
    const double lhs2 = grads[j].dot(xs[j] - z) - grads[i - 1].dot(xs[i] - z);
    double rhs2 = 0.0;
    for (std::size_t k = i + 1; k <= j; ++k) rhs2 += grads[k - 1].dot(xs[k] - xs[k - 1]);
    for (std::size_t k = i; k <= j; ++k) rhs2 += (grads[k] - grads[k - 1]).dot(xs[k] - z);
    err = std::max(err, std::abs(lhs2 - rhs2));
  }
  return err;
}

/// Largest discrepancy over all pairs i < j of the sequence.
inline double check_reduction_identity(const std::vector<Vector>& grads, const std::vector<Vector>& xs,
                                       const Vector& z) {
  double worst = 0.0;
  for (std::size_t j = 1; j < xs.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) worst = std::max(worst, reduction_discrepancy(grads, xs, z, i, j));
  return worst;
}

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h.
template <class Obj>
Vector finite_diff_gradient(const Obj& obj, const Vector& x, double h) {
  require(h > 0.0, "finite_diff_gradient: step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = obj.value_at(probe);
    probe[k] = x[k] - h;
    const double down = obj.value_at(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace polycd
