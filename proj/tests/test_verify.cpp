#include "oracles.hpp"
#include "polycd/kde_huber.hpp"
#include "polycd/least_squares.hpp"
#include "polycd/polycd.hpp"
#include "polycd/quadratic.hpp"
#include "polycd/verify.hpp"

#include <gtest/gtest.h>

using namespace polycd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

/// Gaps f(x^t) - f* for t >= 1, cut where they reach the rounding floor.
std::vector<double> gaps_from_one(const std::vector<double>& values, double f_star) {
  std::vector<double> out;
  for (std::size_t t = 1; t < values.size(); ++t) {
    const double g = values[t] - f_star;
    if (g <= 1e-11 * std::max(1.0, std::abs(f_star))) break;
    out.push_back(g);
  }
  return out;
}

}  // namespace

TEST(ReferenceSolve, SquaredNormOnSimplex) {
  QuadraticObjective obj(2.0 * Matrix::Identity(3, 3), Vector::Zero(3));
  const auto r = reference_solve(obj, VertexPolytope::simplex(3));
  EXPECT_NEAR(r.f, 1.0 / 3.0, 1e-10);
  EXPECT_TRUE(r.converged);
  ASSERT_TRUE(r.grid_value.has_value());
  EXPECT_TRUE(r.grid_consistent);
}

TEST(ReferenceSolve, MotivatingProblem) {
  LeastSquaresObjective obj(Matrix::Identity(2, 2), vec({2, 2}));
  const auto r = reference_solve(obj, VertexPolytope::l1_ball(2, 1.0));
  EXPECT_NEAR(r.f, 4.5, 1e-9);
  EXPECT_TRUE(r.x.isApprox(vec({0.5, 0.5}), 1e-8));
  EXPECT_TRUE(r.grid_consistent);
  EXPECT_LE(r.fw_gap, 1e-9);
}

TEST(ReferenceSolve, BelowRandomFeasiblePoints) {
  std::mt19937_64 gen(81);
  const Matrix q = oracle::random_spd(5, 0.0, gen);
  const Vector c = oracle::gaussian(5, gen);
  QuadraticObjective obj(q, c);
  const auto r = reference_solve(obj, VertexPolytope::simplex(5));
  double best = kInf;
  for (int k = 0; k < 1'000'000; ++k) {
    const Vector x = oracle::simplex_point(5, gen);
    best = std::min(best, 0.5 * x.dot(q * x) + c.dot(x));
  }
  EXPECT_LE(r.f, best);
  EXPECT_NEAR(r.f, oracle::simplex_qp_min(q, c), 1e-10);
}

TEST(ReferenceSolve, ExplicitPolytopeInWeightSpace) {
  // Square [0,1]^2 with f = ||x - (2, 0.5)||^2: optimum (1, 0.5), f = 1.
  const auto sq = VertexPolytope::explicit_vertices(std::vector<Vector>{
      Vector::Zero(2), Vector::Unit(2, 0), Vector::Ones(2), Vector::Unit(2, 1)});
  LeastSquaresObjective obj(Matrix::Identity(2, 2), vec({2, 0.5}));
  const auto r = reference_solve(obj, sq);
  EXPECT_NEAR(r.f, 1.0, 1e-10);
  EXPECT_TRUE(r.x.isApprox(vec({1, 0.5}), 1e-8));
  EXPECT_TRUE(r.grid_consistent);
}

TEST(ReferenceSolve, FrankWolfeGapBoundsSuboptimality) {
  std::mt19937_64 gen(82);
  const Matrix q = oracle::random_spd(6, 0.0, gen);
  const Vector c = oracle::gaussian(6, gen);
  QuadraticObjective obj(q, c);
  const auto p = VertexPolytope::simplex(6);
  const double f_star = oracle::simplex_qp_min(q, c);
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::simplex_point(6, gen);
    const double gap = frank_wolfe_gap(p, x, obj.gradient_at(x));
    EXPECT_GE(gap + 1e-12, obj.value_at(x) - f_star);
  }
}

TEST(ReferenceSolve, ReportsNonConvergence) {
  std::mt19937_64 gen(83);
  QuadraticObjective obj(oracle::random_spd(8, 0.0, gen), oracle::gaussian(8, gen));
  ReferenceOptions opt;
  opt.max_iter = 2;
  const auto r = reference_solve(obj, VertexPolytope::simplex(8), opt);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual, opt.tol);
  EXPECT_EQ(r.iterations, 2);
}

TEST(ReferenceSolve, AdaptiveStepAgrees) {
  std::mt19937_64 gen(84);
  const Matrix a = oracle::gaussian(30, 10, gen);
  const Vector b = oracle::gaussian(30, gen);
  LeastSquaresObjective obj(a, b);
  const auto p = VertexPolytope::l1_ball(10, 0.8);
  ReferenceOptions opt;
  const double fixed = reference_solve(obj, p, opt).f;
  opt.adaptive_step = true;
  EXPECT_NEAR(reference_solve(obj, p, opt).f, fixed, 1e-10 * std::max(1.0, fixed));
}

TEST(SimplexDecompose, Examples) {
  const auto d = simplex_decompose(vec({1, 0}), vec({0, 1}));
  EXPECT_EQ(d.eta, 2.0);
  EXPECT_EQ(d.p, vec({1, 0}));
  EXPECT_EQ(d.q, vec({0, 1}));
  const auto same = simplex_decompose(vec({0.3, 0.7}), vec({0.3, 0.7}));
  EXPECT_EQ(same.eta, 0.0);
  EXPECT_EQ(same.p, vec({0.3, 0.7}));
  EXPECT_THROW(simplex_decompose(vec({0.6, 0.6}), vec({0.5, 0.5})), ContractViolation);
}

TEST(SimplexDecompose, RandomPairs) {
  std::mt19937_64 gen(85);
  std::bernoulli_distribution sparse(0.3);
  for (int k = 0; k < 10'000; ++k) {
    Vector a = oracle::simplex_point(6, gen);
    for (Index j = 0; j < 5; ++j)
      if (sparse(gen)) a[j] = 0.0;
    a /= a.sum();
    const Vector b = oracle::simplex_point(6, gen);
    const auto d = simplex_decompose(a, b);
    ASSERT_LE(((a - b) - 0.5 * d.eta * (d.p - d.q)).cwiseAbs().maxCoeff(), 1e-14);
    ASSERT_NEAR(d.p.sum(), 1.0, 1e-14);
    ASSERT_NEAR(d.q.sum(), 1.0, 1e-14);
    for (Index j = 0; j < 6; ++j)
      if (a[j] == 0.0) ASSERT_EQ(d.p[j], 0.0);
  }
}

TEST(SequenceLemma, HarmonicSequence) {
  std::vector<double> a;
  for (int k = 1; k <= 1000; ++k) a.push_back(1.0 / k);
  EXPECT_EQ(check_sequence_lemma(a, 1.0).outcome, LemmaOutcome::Holds);
}

TEST(SequenceLemma, PremiseFailures) {
  const auto flat = check_sequence_lemma({1.0, 1.0, 1.0}, 1.0);
  EXPECT_EQ(flat.outcome, LemmaOutcome::PremiseFailed);
  EXPECT_EQ(flat.index, 1u);
  EXPECT_EQ(check_sequence_lemma({1.0, -0.5}, 1.0).outcome, LemmaOutcome::PremiseFailed);
  EXPECT_EQ(to_string(LemmaOutcome::ConclusionFailed), "conclusion-failed");
}

TEST(SequenceLemma, ConclusionCheckedWithSlackOnly) {
  // A premise-satisfying sequence cannot violate the bound; a negative
  // slack makes the conclusion check fire, exercising that branch.
  const auto r = check_sequence_lemma({3.0, 0.1}, 1.0, -1.0);
  EXPECT_EQ(r.outcome, LemmaOutcome::ConclusionFailed);
}

TEST(SequenceLemma, PolyCDLineSearchGaps) {
  std::mt19937_64 gen(86);
  for (int rep = 0; rep < 10; ++rep) {
    const Index m = 5;
    const Matrix q = oracle::random_spd(m, 0.0, gen);
    const Vector c = 2.0 * oracle::gaussian(m, gen);
    const double f_star = oracle::simplex_qp_min(q, c);
    QuadraticObjective obj(q, c);
    SolveConfig cfg;
    cfg.max_outer = 300;
    cfg.rel_improve_tol = 0.0;
    const auto res = polycd_solve(obj, VertexPolytope::simplex(m), cfg);
    const double lambda = 1.0 / (2.0 * static_cast<double>(m) * obj.smoothness() * 2.0);
    const auto a = gaps_from_one(res.outer_values(), f_star);
    const auto r = check_sequence_lemma(a, lambda, 1e-12);
    EXPECT_EQ(r.outcome, LemmaOutcome::Holds) << to_string(r.outcome) << " at " << r.index.value_or(0);
  }
}

TEST(ReductionIdentity, RandomSequences) {
  std::mt19937_64 gen(87);
  for (int rep = 0; rep < 100; ++rep) {
    QuadraticObjective obj(oracle::random_spd(4, 0.0, gen), oracle::gaussian(4, gen));
    std::vector<Vector> xs, gs;
    for (int k = 0; k < 5; ++k) {
      xs.push_back(oracle::simplex_point(4, gen));
      gs.push_back(obj.gradient_at(xs.back()));
    }
    const Vector z = oracle::simplex_point(4, gen);
    EXPECT_LE(check_reduction_identity(gs, xs, z), 1e-10);
    EXPECT_LE(reduction_discrepancy(gs, xs, z, 2, 3), 1e-12);
    const double at_end = reduction_discrepancy(gs, xs, xs[4], 1, 4);
    EXPECT_TRUE(std::isfinite(at_end));
    EXPECT_LE(at_end, 1e-10);
  }
  std::vector<Vector> one{Vector::Zero(2)};
  EXPECT_THROW(reduction_discrepancy(one, one, Vector::Zero(2), 0, 1), ContractViolation);
}

TEST(FiniteDiff, ConstantObjectiveIsZero) {
  QuadraticObjective obj(Matrix::Zero(3, 3), Vector::Zero(3), 7.0);
  EXPECT_EQ(finite_diff_gradient(obj, vec({0.2, 0.3, 0.5}), 1e-5), Vector::Zero(3));
  EXPECT_THROW(finite_diff_gradient(obj, vec({0.2, 0.3, 0.5}), 0.0), ContractViolation);
}

TEST(FiniteDiff, LeastSquaresAndKde) {
  std::mt19937_64 gen(88);
  LeastSquaresObjective ls(oracle::gaussian(20, 8, gen), oracle::gaussian(20, gen));
  const Vector x = oracle::gaussian(8, gen);
  const Vector g = ls.gradient_at(x);
  EXPECT_LE((finite_diff_gradient(ls, x, 1e-5) - g).norm(), 1e-4 * g.norm());

  KdeHuberObjective kde(1.5 * oracle::gaussian(2, 50, gen), 1.0, 0.4);
  for (int k = 0; k < 5; ++k) {
    const Vector w = oracle::simplex_point(50, gen);
    const Vector gk = kde.gradient_at(w);
    EXPECT_LE((finite_diff_gradient(kde, w, 1e-5) - gk).norm(), 1e-3 * gk.norm());
  }
}
