#pragma once

#include "polycd/projection.hpp"
#include "polycd/types.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace polycd {

enum class PolytopeKind { StandardSimplex, L1Ball, ExplicitVertices };

inline std::string to_string(PolytopeKind kind) {
  switch (kind) {
    case PolytopeKind::StandardSimplex: return "simplex";
    case PolytopeKind::L1Ball: return "l1ball";
    case PolytopeKind::ExplicitVertices: return "explicit";
  }
  return "unknown";
}

/// A vertex that is a scaled canonical basis vector: value * e_coord.
struct Atom {
  Index coord;
  double value;
};

struct DiameterResult {
  double value = 0.0;
  /// True when value is the centroid-based upper bound rather than the exact
  /// pairwise maximum.
  bool is_upper_bound = false;
};

/**
 * \brief Bounded polytope described by its vertex list {v^0, ..., v^{M-1}}.
 *
 * Three kinds are supported. The standard simplex and the l1-ball keep
 * their vertices implicit as one-hot atoms, so every vertex query below is
 * O(1) or O(d) without allocating a dense vertex. Explicit vertex lists are
 * stored column-wise; redundant (non-extreme) points are accepted and count
 * toward M.
 *
 * Vertex order is fixed: e_0, ..., e_{d-1} for the simplex and
 * +C e_0, -C e_0, +C e_1, -C e_1, ... for the l1-ball. Indices are 0-based.
 *
 * Instances are immutable and cheap to copy (explicit vertices are shared).
 */
class VertexPolytope {
 public:
  static VertexPolytope simplex(Index d) {
    require(d >= 1, "simplex: dimension must be positive");
    return VertexPolytope(PolytopeKind::StandardSimplex, d, d, 1.0, nullptr);
  }

  static VertexPolytope l1_ball(Index d, double radius) {
    require(d >= 1, "l1_ball: dimension must be positive");
    require(radius > 0.0 && std::isfinite(radius), "l1_ball: radius must be positive and finite");
    return VertexPolytope(PolytopeKind::L1Ball, d, 2 * d, radius, nullptr);
  }

  /// Columns of `vertices` are the points v^0..v^{M-1}.
  static VertexPolytope explicit_vertices(Matrix vertices) {
    require(vertices.rows() >= 1 && vertices.cols() >= 1, "explicit_vertices: need at least one vertex");
    require(vertices.allFinite(), "explicit_vertices: vertices must be finite");
    const Index d = vertices.rows();
    const Index m = vertices.cols();
    return VertexPolytope(PolytopeKind::ExplicitVertices, d, m, 1.0,
                          std::make_shared<const Matrix>(std::move(vertices)));
  }

  static VertexPolytope explicit_vertices(const std::vector<Vector>& points) {
    require(!points.empty(), "explicit_vertices: need at least one vertex");
    Matrix v(points.front().size(), static_cast<Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) {
      require(points[j].size() == v.rows(), "explicit_vertices: inconsistent dimensions");
      v.col(static_cast<Index>(j)) = points[j];
    }
    return explicit_vertices(std::move(v));
  }

  PolytopeKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  /// Number of vertices M.
  Index size() const { return size_; }
  /// l1-ball radius C (1 for the other kinds).
  double radius() const { return radius_; }
  bool structured() const { return kind_ != PolytopeKind::ExplicitVertices; }

  void check_index(Index i) const {
    if (i < 0 || i >= size_)
      throw ContractViolation("vertex index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(size_) + ")");
  }

  /// One-hot form of vertex i; empty for explicit vertex lists.
  std::optional<Atom> atom(Index i) const {
    check_index(i);
    switch (kind_) {
      case PolytopeKind::StandardSimplex: return Atom{i, 1.0};
      case PolytopeKind::L1Ball: return Atom{i / 2, (i % 2 == 0) ? radius_ : -radius_};
      case PolytopeKind::ExplicitVertices: return std::nullopt;
    }
    return std::nullopt;
  }

  Vector vertex(Index i) const {
    if (auto a = atom(i)) {
      Vector v = Vector::Zero(dim_);
      v[a->coord] = a->value;
      return v;
    }
    return vertices_->col(i);
  }

  /// <v^i, y>
  double dot(Index i, const Vector& y) const {
    if (auto a = atom(i)) return a->value * y[a->coord];
    return vertices_->col(i).dot(y);
  }

  /// ||v^i||^2
  double squared_norm(Index i) const {
    if (auto a = atom(i)) return a->value * a->value;
    return vertices_->col(i).squaredNorm();
  }

  /// <v^i, v^j>
  double vertex_dot(Index i, Index j) const {
    auto ai = atom(i);
    auto aj = atom(j);
    if (ai && aj) return ai->coord == aj->coord ? ai->value * aj->value : 0.0;
    return vertices_->col(i).dot(vertices_->col(j));
  }

  /// ||v^i - x||^2 in O(d).
  double squared_distance(Index i, const Vector& x) const {
    if (auto a = atom(i)) {
      const double xi = x[a->coord];
      return x.squaredNorm() - xi * xi + (xi - a->value) * (xi - a->value);
    }
    return (vertices_->col(i) - x).squaredNorm();
  }

  /// x <- x + alpha (v^i - x)
  void move_toward(Vector& x, Index i, double alpha) const {
    if (auto a = atom(i)) {
      x *= (1.0 - alpha);
      x[a->coord] += alpha * a->value;
      return;
    }
    x = (1.0 - alpha) * x + alpha * vertices_->col(i);
  }

  /// A v^i. Structured kinds extract one scaled column; explicit vertices
  /// cost a full matrix-vector product.
  template <class Mat>
  Vector image(const Mat& a, Index i) const {
    require(a.cols() == dim_, "image: matrix column count must equal polytope dimension");
    if (auto at = atom(i)) return at->value * a.col(at->coord);
    return a * vertices_->col(i);
  }

  /// sum_j weights_j v^j
  Vector combine(const Vector& weights) const {
    require(weights.size() == size_, "combine: weight vector must have length M");
    if (kind_ == PolytopeKind::ExplicitVertices) return (*vertices_) * weights;
    Vector x = Vector::Zero(dim_);
    for (Index i = 0; i < size_; ++i) {
      if (weights[i] == 0.0) continue;
      const Atom a = *atom(i);
      x[a.coord] += weights[i] * a.value;
    }
    return x;
  }

  /// Membership test with absolute tolerance. Explicit vertex lists use the
  /// distance to the hull computed by projected gradient.
  bool contains(const Vector& x, double tol = 1e-10) const;

  /// Euclidean projection onto the polytope (structured kinds only).
  Vector project(const Vector& y) const {
    switch (kind_) {
      case PolytopeKind::StandardSimplex: return project_simplex(y, 1.0);
      case PolytopeKind::L1Ball: return project_l1_ball(y, radius_);
      case PolytopeKind::ExplicitVertices: break;
    }
    throw ContractViolation("project: projection onto an explicit vertex hull is not supported");
  }

  /// A point of the polytope used as the centre for the diameter bound.
  Vector centroid() const {
    return combine(Vector::Constant(size_, 1.0 / static_cast<double>(size_)));
  }

  const Matrix& explicit_matrix() const {
    require(vertices_ != nullptr, "explicit_matrix: polytope is not explicit");
    return *vertices_;
  }

 private:
  VertexPolytope(PolytopeKind kind, Index d, Index m, double radius,
                 std::shared_ptr<const Matrix> vertices)
      : kind_(kind), dim_(d), size_(m), radius_(radius), vertices_(std::move(vertices)) {}

  PolytopeKind kind_;
  Index dim_;
  Index size_;
  double radius_;
  std::shared_ptr<const Matrix> vertices_;
};

inline constexpr Index kDefaultDiameterCap = 4096;

/**
 * Diameter sup ||x - y|| over the polytope. Exact pairwise maximum when
 * M <= cap; otherwise 2 max_i ||v^i - centroid||, flagged as a bound.
 */
inline DiameterResult diameter(const VertexPolytope& p, Index cap = kDefaultDiameterCap) {
  const Index m = p.size();
  std::vector<double> sq(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) sq[static_cast<std::size_t>(i)] = p.squared_norm(i);

  if (m <= cap) {
    double best = 0.0;
    if (p.structured()) {
      for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
          best = std::max(best, sq[i] + sq[j] - 2.0 * p.vertex_dot(i, j));
    } else {
      const Matrix gram = p.explicit_matrix().transpose() * p.explicit_matrix();
      for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
          best = std::max(best, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
    }
    return {std::sqrt(std::max(best, 0.0)), false};
  }

  const Vector c = p.centroid();
  const double cc = c.squaredNorm();
  double far = 0.0;
  for (Index i = 0; i < m; ++i)
    far = std::max(far, sq[static_cast<std::size_t>(i)] - 2.0 * p.dot(i, c) + cc);
  return {2.0 * std::sqrt(std::max(far, 0.0)), true};
}

namespace detail {

/// min over mu in simplex of ||V mu - y||^2 by accelerated projected
/// gradient with restarts. Returns the minimiser.
inline Vector hull_nearest_weights(const Matrix& v, const Vector& y, double tol = 1e-12,
                                   int max_iter = 200000) {
  const Index m = v.cols();
  const Matrix gram = v.transpose() * v;
  const Vector vy = v.transpose() * y;
  const double lip = 2.0 * std::max(gram.operatorNorm(), 1e-300);
  auto objective = [&](const Vector& mu) { return (v * mu - y).squaredNorm(); };
  Vector mu = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector z = mu;
  double t = 1.0;
  double f_prev = objective(mu);
  for (int k = 0; k < max_iter; ++k) {
    const Vector grad = 2.0 * (gram * z - vy);
    Vector next = project_simplex(z - grad / lip);
    const double f_next = objective(next);
    if (f_next > f_prev) {  // restart momentum
      t = 1.0;
      z = mu;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - mu);
    const double step = (next - mu).norm();
    mu = std::move(next);
    t = t_next;
    const double drop = f_prev - f_next;
    f_prev = f_next;
    if (step <= tol && drop <= tol * std::max(1.0, f_next)) break;
  }
  return mu;
}

}  // namespace detail

inline bool VertexPolytope::contains(const Vector& x, double tol) const {
  require(x.size() == dim_, "contains: dimension mismatch");
  switch (kind_) {
    case PolytopeKind::StandardSimplex:
      return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
    case PolytopeKind::L1Ball:
      return x.lpNorm<1>() <= radius_ + tol;
    case PolytopeKind::ExplicitVertices: {
      const Vector mu = detail::hull_nearest_weights(*vertices_, x);
      return ((*vertices_) * mu - x).norm() <= tol + 1e-9;
    }
  }
  return false;
}

}  // namespace polycd
