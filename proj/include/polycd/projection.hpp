#pragma once

#include "polycd/types.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace polycd {

/// Euclidean projection onto {x >= 0, sum(x) = radius} by sort-and-threshold.
inline Vector project_simplex(const Vector& y, double radius = 1.0) {
  require(radius > 0.0, "project_simplex: radius must be positive");
  const Index n = y.size();
  require(n >= 1, "project_simplex: empty vector");
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += sorted[k];
    const double candidate = (cumsum - radius) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  return (y.array() - tau).max(0.0).matrix();
}

/// Euclidean projection onto {x : ||x||_1 <= radius}. Points already inside
/// are returned unchanged; otherwise |y| is projected onto the scaled simplex
/// and the signs are restored.
inline Vector project_l1_ball(const Vector& y, double radius) {
  require(radius > 0.0, "project_l1_ball: radius must be positive");
  if (y.lpNorm<1>() <= radius) return y;
  const Vector magnitude = project_simplex(y.cwiseAbs(), radius);
  Vector out(y.size());
  for (Index j = 0; j < y.size(); ++j)
    out[j] = y[j] < 0.0 ? -magnitude[j] : magnitude[j];
  return out;
}

}  // namespace polycd
