#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace gotd;
using gotd::testing::random_factored;
using gotd::testing::random_hyperboloid_lowrank;
using gotd::testing::random_oblique_lowrank;

namespace {

/// (1/4) Dh ∘ P_T ∘ Dh^*, assembled column by column through the generic
/// constraint and manifold maps.
Matrix gram_through_tangent(const FactoredPoint &x, Index n) {
  const Index m = x.V.rows();
  const FixedRankManifold M(n + 1, m, x.rank());
  const HyperboloidConstraint H(n, m);
  const Matrix X = x.dense();
  Matrix out(m, m);
  for (Index j = 0; j < m; ++j) {
    out.col(j) = 0.25 * H.diff(X, M.tangent_project(x, H.adjoint(X, Vector::Unit(m, j))));
  }
  return out;
}

} // namespace

TEST(HypWorkspace, ReconstructsJX) {
  Rng rng(1);
  const HyperboloidConstraint H(6, 9);
  for (int t = 0; t < 10; ++t) {
    const FactoredPoint x = random_factored(rng, 7, 9, 3);
    const HypLowRankWorkspace ws = build_workspace(x, H.signature());
    const Matrix JX = HyperboloidConstraint::apply_J(x.dense());
    EXPECT_LT((ws.U * ws.P + ws.Q - JX).norm(), 1e-12 * JX.norm());
    EXPECT_LT((x.U.transpose() * ws.Q).norm(), 1e-12 * JX.norm());
    EXPECT_LT((ws.D_P - ws.P.colwise().squaredNorm().transpose()).norm(), 1e-15);
  }
}

TEST(HypWorkspace, IdentitySignatureHasNoResidual) {
  Rng rng(2);
  const FactoredPoint x = random_factored(rng, 6, 8, 2);
  const HypLowRankWorkspace ws = build_workspace(x, Vector::Ones(6));
  EXPECT_LT(ws.Q.norm(), 1e-12);
  const Vector w = rng.normal_matrix(8, 1);
  EXPECT_LT((apply_A(ws, w) - ws.D_P.cwiseProduct(w)).norm(), 1e-12);
  EXPECT_LT((assemble_A_dense(ws) - Matrix(ws.D_P.asDiagonal())).norm(), 1e-12);
}

TEST(HypWorkspace, ShapeMismatch) {
  Rng rng(3);
  const FactoredPoint x = random_factored(rng, 6, 8, 2);
  EXPECT_THROW(build_workspace(x, Vector::Ones(5)), Error);
  const HypLowRankWorkspace ws = build_workspace(x, Vector::Ones(6));
  EXPECT_THROW(apply_A(ws, Vector::Ones(7)), Error);
}

TEST(ApplyA, ZeroInput) {
  Rng rng(4);
  const HypLowRankWorkspace ws =
      build_workspace(random_factored(rng, 5, 7, 2), HyperboloidConstraint(4, 7).signature());
  EXPECT_EQ(apply_A(ws, Vector::Zero(7)).norm(), 0.0);
}

TEST(HypWorkspace, BoostedPointsHaveResidual) {
  Rng rng(13);
  const FactoredPoint x = random_hyperboloid_lowrank(rng, 6, 10, 2);
  EXPECT_LT(HyperboloidConstraint(6, 10).value(x.dense()).norm(), 1e-10);
  const HypLowRankWorkspace ws =
      build_workspace(x, HyperboloidConstraint(6, 10).signature());
  EXPECT_GT(ws.Q.norm(), 1e-2);
}

TEST(ApplyA, MatchesDenseAssembly) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + t % 10, m = 4 + (7 * t) % 15, s = 1 + t % 3;
    const FactoredPoint x = random_hyperboloid_lowrank(rng, n, m, s - 1 > 0 ? s - 1 : 1);
    const HypLowRankWorkspace ws =
        build_workspace(x, HyperboloidConstraint(n, m).signature());
    const Matrix A = assemble_A_dense(ws);
    for (int k = 0; k < 3; ++k) {
      const Vector w = rng.normal_matrix(m, 1);
      EXPECT_LT((apply_A(ws, w) - A * w).norm(), 1e-12 * std::max(1.0, (A * w).norm()));
    }
    EXPECT_LT((diag_A(ws) - A.diagonal()).norm(), 1e-12 * A.norm());
    EXPECT_EQ((A - A.transpose()).norm(), 0.0);
  }
}

TEST(AssembleA, EqualsGramOfTangentProjectedAdjoint) {
  Rng rng(6);
  for (int t = 0; t < 5; ++t) {
    const FactoredPoint x = random_hyperboloid_lowrank(rng, 6, 10, 2);
    const HypLowRankWorkspace ws =
        build_workspace(x, HyperboloidConstraint(6, 10).signature());
    const Matrix A = assemble_A_dense(ws);
    EXPECT_LT((A - gram_through_tangent(x, 6)).norm(), 1e-10 * A.norm());
  }
}

TEST(AssembleA, PositiveDefiniteAtFeasiblePoints) {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const FactoredPoint x = random_hyperboloid_lowrank(rng, 8, 12, 3);
    const HypLowRankWorkspace ws =
        build_workspace(x, HyperboloidConstraint(8, 12).signature());
    const Vector ev =
        Eigen::SelfAdjointEigenSolver<Matrix>(assemble_A_dense(ws)).eigenvalues();
    EXPECT_GT(ev(0), 1e-8 * ev(ev.size() - 1));
  }
}

TEST(ProjectHypLowRank, NormalInputVanishes) {
  Rng rng(8);
  const FactoredPoint x = random_hyperboloid_lowrank(rng, 5, 9, 2);
  const HypLowRankWorkspace ws = build_workspace(x, HyperboloidConstraint(5, 9).signature());
  const Matrix Pu = Matrix::Identity(6, 6) - x.U * x.U.transpose();
  const Matrix Pv = Matrix::Identity(9, 9) - x.V * x.V.transpose();
  const HypProjection p = project_hyp_lowrank(x, ws, Pu * rng.normal_matrix(6, 9) * Pv);
  EXPECT_LT(p.value.norm(), 1e-12);
}

TEST(ProjectHypLowRank, FixesElementsOfIntersection) {
  Rng rng(9);
  const FactoredPoint x = random_hyperboloid_lowrank(rng, 5, 9, 2);
  const HypLowRankWorkspace ws = build_workspace(x, HyperboloidConstraint(5, 9).signature());
  const Matrix s = project_hyp_lowrank(x, ws, rng.normal_matrix(6, 9), 1e-14).value;
  const HypProjection again = project_hyp_lowrank(x, ws, s, 1e-14);
  EXPECT_LT((again.value - s).norm(), 1e-10 * s.norm());
  EXPECT_LT(again.solve.x.norm(), 1e-10 * s.norm());
}

TEST(ProjectHypLowRank, MatchesGenericPath) {
  Rng rng(10);
  const Index n = 12, m = 15, s = 3;
  const FixedRankManifold M(n + 1, m, s);
  const HyperboloidConstraint H(n, m);
  for (int t = 0; t < 10; ++t) {
    const FactoredPoint x = random_hyperboloid_lowrank(rng, n, m, s - 1);
    const HypLowRankWorkspace ws = build_workspace(x, H.signature());
    const Matrix xi = rng.normal_matrix(n + 1, m);
    const HypProjection fast = project_hyp_lowrank(x, ws, xi, kHypProjectionTolerance);
    EXPECT_TRUE(fast.solve.converged);
    const Matrix generic = tangent_intersection_project(M, H, x, xi);
    EXPECT_LT((fast.value - generic).norm(), 1e-8 * std::max(1.0, xi.norm()));
    EXPECT_LT(H.diff(x.dense(), fast.value).norm(), 1e-8 * xi.norm());
    EXPECT_LT(M.normal_component(x, fast.value), 1e-10 * xi.norm());
  }
}

TEST(ProjectHypLowRank, ProjectorReportsStalledSolve) {
  Rng rng(11);
  const Index n = 20, m = 40;
  const FactoredPoint x = random_hyperboloid_lowrank(rng, n, m, 4);
  const auto proj = make_hyp_lowrank_projector(HyperboloidConstraint(n, m).signature(), 1e-15, 1);
  try {
    proj(x, x.dense(), rng.normal_matrix(n + 1, m));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConverged);
  }
}

TEST(ProjectObliqueLowRank, MatchesGenericPath) {
  Rng rng(12);
  const FixedRankManifold M(9, 7, 3);
  const ObliqueConstraint H(9, 7);
  for (int t = 0; t < 10; ++t) {
    // feasibility of x is not required
    const FactoredPoint x = t % 2 ? random_oblique_lowrank(rng, 9, 7, 3)
                                  : random_factored(rng, 9, 7, 3);
    const Matrix X = x.dense();
    const Matrix xi = rng.normal_matrix(9, 7);
    const Matrix fast = project_oblique_lowrank(x, X, xi);
    EXPECT_LT((fast - tangent_intersection_project(M, H, x, xi)).norm(), 1e-10 * xi.norm());
  }
}
