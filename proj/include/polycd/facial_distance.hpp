#pragma once

#include "polycd/polytope.hpp"

#include <algorithm>
#include <vector>

namespace polycd {

inline constexpr Index kFacialDistanceCap = 12;

class NoProperFace : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline Matrix select_columns(const Matrix& v, const std::vector<Index>& cols) {
  Matrix out(v.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = v.col(cols[k]);
  return out;
}

/// Squared distance between conv(columns of p) and conv(columns of q):
/// min ||p mu - q nu||^2 over mu, nu in their simplices, solved by
/// accelerated projected gradient on the product of simplices.
inline double hull_pair_squared_distance(const Matrix& p, const Matrix& q, double tol = 1e-10,
                                         int max_iter = 500000) {
  const Index a = p.cols();
  const Index b = q.cols();
  Matrix stacked(p.rows(), a + b);
  stacked << p, -q;
  const Matrix gram = stacked.transpose() * stacked;
  const double lip = 2.0 * std::max(gram.operatorNorm(), 1e-300);
  auto project = [&](const Vector& w) {
    Vector out(a + b);
    out.head(a) = project_simplex(w.head(a));
    out.tail(b) = project_simplex(w.tail(b));
    return out;
  };
  auto value = [&](const Vector& w) { return (stacked * w).squaredNorm(); };

  Vector w(a + b);
  w.head(a).setConstant(1.0 / static_cast<double>(a));
  w.tail(b).setConstant(1.0 / static_cast<double>(b));
  Vector z = w;
  double t = 1.0;
  double f = value(w);
  for (int k = 0; k < max_iter; ++k) {
    Vector next = project(z - (2.0 / lip) * (gram * z));
    const double f_next = value(next);
    if (f_next > f) {
      t = 1.0;
      z = w;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - w);
    const double moved = (next - w).norm();
    w = std::move(next);
    t = t_next;
    const bool stalled = f - f_next <= tol * tol;
    f = f_next;
    if (f <= tol * tol || (moved <= tol && stalled)) break;
  }
  return f;
}

/// True when vertex subset `t` spans a face: aff(T) misses conv(V \ T).
inline bool spans_face(const Matrix& v, const std::vector<Index>& t, const std::vector<Index>& rest,
                       double scale) {
  const Vector anchor = v.col(t.front());
  Matrix dirs(v.rows(), static_cast<Index>(t.size()) - 1);
  for (std::size_t k = 1; k < t.size(); ++k) dirs.col(static_cast<Index>(k) - 1) = v.col(t[k]) - anchor;

  Matrix complement = Matrix::Identity(v.rows(), v.rows());
  if (dirs.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(dirs, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    for (Index k = 0; k < sv.size(); ++k) {
      if (sv[k] <= 1e-12 * std::max(1.0, sv[0])) break;
      complement -= svd.matrixU().col(k) * svd.matrixU().col(k).transpose();
    }
  }
  const Matrix others = complement * select_columns(v, rest);
  const Vector target = complement * anchor;
  const Vector mu = hull_nearest_weights(others, target, 1e-14);
  return (others * mu - target).norm() > 1e-6 * scale;
}

}  // namespace detail

/// Every proper nonempty face, as the list of vertex indices it contains.
inline std::vector<std::vector<Index>> enumerate_faces(const VertexPolytope& p) {
  const Index m = p.size();
  if (m > kFacialDistanceCap)
    throw UnsupportedSize("face enumeration supports at most " + std::to_string(kFacialDistanceCap) +
                          " vertices, got " + std::to_string(m));
  std::vector<std::vector<Index>> faces;

  switch (p.kind()) {
    case PolytopeKind::StandardSimplex: {
      for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
        std::vector<Index> t;
        for (Index i = 0; i < m; ++i)
          if (mask & (1u << i)) t.push_back(i);
        faces.push_back(std::move(t));
      }
      break;
    }
    case PolytopeKind::L1Ball: {
      // Each coordinate contributes nothing, +C e_j or -C e_j.
      const Index d = p.dim();
      Index total = 1;
      for (Index j = 0; j < d; ++j) total *= 3;
      for (Index code = 1; code < total; ++code) {
        std::vector<Index> t;
        Index rem = code;
        for (Index j = 0; j < d; ++j, rem /= 3) {
          if (rem % 3 == 1) t.push_back(2 * j);
          if (rem % 3 == 2) t.push_back(2 * j + 1);
        }
        faces.push_back(std::move(t));
      }
      break;
    }
    case PolytopeKind::ExplicitVertices: {
      const Matrix& v = p.explicit_matrix();
      const double scale = 1.0 + v.colwise().norm().maxCoeff();
      for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
        std::vector<Index> t;
        std::vector<Index> rest;
        for (Index i = 0; i < m; ++i) (mask & (1u << i) ? t : rest).push_back(i);
        if (detail::spans_face(v, t, rest, scale)) faces.push_back(std::move(t));
      }
      break;
    }
  }
  return faces;
}

/**
 * Facial distance: the minimum over proper nonempty faces F of
 * dist(F, conv(vertices not in F)). Exponential in M, so capped at 12
 * vertices.
 */
inline double facial_distance(const VertexPolytope& p) {
  const auto faces = enumerate_faces(p);
  if (faces.empty()) throw NoProperFace("facial_distance: polytope has no proper face");
  const Index m = p.size();
  Matrix v(p.dim(), m);
  for (Index i = 0; i < m; ++i) v.col(i) = p.vertex(i);

  double best = kInf;
  for (const auto& face : faces) {
    std::vector<bool> in_face(static_cast<std::size_t>(m), false);
    for (Index i : face) in_face[static_cast<std::size_t>(i)] = true;
    std::vector<Index> rest;
    for (Index i = 0; i < m; ++i)
      if (!in_face[static_cast<std::size_t>(i)]) rest.push_back(i);
    const double sq = detail::hull_pair_squared_distance(detail::select_columns(v, face),
                                                         detail::select_columns(v, rest));
    best = std::min(best, std::sqrt(std::max(sq, 0.0)));
  }
  return best;
}

}  // namespace polycd
