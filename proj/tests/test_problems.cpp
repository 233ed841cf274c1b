#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace gotd;
using gotd::testing::central_difference;
using gotd::testing::relative_error;

namespace {

template <class F, class G>
void expect_gradient_matches_fd(const F &f, const G &grad, const Matrix &X,
                                const Matrix &Z) {
  const double fd = central_difference(f, X, Z, 1e-5);
  const double an = inner(grad(X), Z);
  EXPECT_LT(relative_error(fd, an), 1e-6) << "fd " << fd << " analytic " << an;
}

Index linear(const Entry &e, Index n) { return e.row * n + e.col; }

} // namespace

TEST(SphereData, SampleSize) {
  EXPECT_EQ(sphere_sample_size(100, 120, 5, 6.0), 6450);
  // a disjoint test set of the same size does not fit: 2 * 6450 > 12000
  EXPECT_THROW(gen_sphere_data(100, 120, 5, 6.0, 1), Error);
  const SphereFitProblem p = gen_sphere_data(100, 120, 5, 4.0, 1);
  EXPECT_EQ(p.omega.size(), 4300u);
  EXPECT_EQ(p.gamma.size(), 4300u);
}

TEST(SphereData, UnitRowsAndRank) {
  const SphereFitProblem p = gen_sphere_data(40, 50, 3, 3.0, 2);
  EXPECT_LT((p.A.rowwise().norm() - Vector::Ones(40)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(p.r, 3);
}

TEST(SphereData, DisjointUniqueSamples) {
  const SphereFitProblem p = gen_sphere_data(40, 50, 3, 3.0, 3);
  std::set<Index> om, ga;
  for (const Entry &e : p.omega) {
    om.insert(linear(e, 50));
  }
  for (const Entry &e : p.gamma) {
    ga.insert(linear(e, 50));
    EXPECT_EQ(om.count(linear(e, 50)), 0u);
  }
  EXPECT_EQ(om.size(), p.omega.size());
  EXPECT_EQ(ga.size(), p.gamma.size());
}

TEST(SphereData, Deterministic) {
  const SphereFitProblem a = gen_sphere_data(30, 20, 2, 2.0, 9);
  const SphereFitProblem b = gen_sphere_data(30, 20, 2, 2.0, 9);
  const SphereFitProblem c = gen_sphere_data(30, 20, 2, 2.0, 10);
  EXPECT_EQ(a.A, b.A);
  ASSERT_EQ(a.omega.size(), b.omega.size());
  for (size_t k = 0; k < a.omega.size(); ++k) {
    EXPECT_EQ(linear(a.omega[k], 20), linear(b.omega[k], 20));
  }
  EXPECT_NE(a.A, c.A);
}

TEST(SphereData, InfeasibleSampling) {
  try {
    gen_sphere_data(10, 10, 3, 6.0, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSampling);
  }
}

TEST(SphereObjective, GradientExamples) {
  const SphereFitProblem p = gen_sphere_data(30, 40, 2, 3.0, 4);
  EXPECT_EQ(sphere_grad(p, p.A).norm(), 0.0);
  EXPECT_EQ(sphere_objective(p, p.A), 0.0);
  Rng rng(5);
  const Matrix X = rng.normal_matrix(30, 40);
  Matrix G = sphere_grad(p, X);
  for (const Entry &e : p.omega) {
    G(e.row, e.col) = 0.0;
  }
  EXPECT_EQ(G.norm(), 0.0);
}

TEST(SphereObjective, GradientMatchesFiniteDifferences) {
  const SphereFitProblem p = gen_sphere_data(30, 40, 2, 3.0, 6);
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    expect_gradient_matches_fd(
        [&p](const Matrix &X) { return sphere_objective(p, X); },
        [&p](const Matrix &X) { return sphere_grad(p, X); },
        rng.normal_matrix(30, 40), rng.normal_matrix(30, 40));
  }
}

TEST(SphereTestError, Examples) {
  const SphereFitProblem p = gen_sphere_data(30, 40, 2, 3.0, 8);
  EXPECT_EQ(sphere_test_error(p, p.A), 0.0);
  EXPECT_DOUBLE_EQ(sphere_test_error(p, Matrix::Zero(30, 40)), 1.0);
  Rng rng(9);
  const Matrix X = rng.normal_matrix(30, 40);
  Matrix mask = Matrix::Zero(30, 40);
  for (const Entry &e : p.gamma) {
    mask(e.row, e.col) = 1.0;
  }
  const double direct = (mask.cwiseProduct(X - p.A)).norm() / mask.cwiseProduct(p.A).norm();
  EXPECT_NEAR(sphere_test_error(p, X), direct, 1e-13);
}

TEST(SphereInit, RankFeasibleDeterministic) {
  const SphereFitProblem p = gen_sphere_data(30, 40, 3, 2.0, 10);
  const FactoredPoint a = init_sphere(p, 1);
  const FactoredPoint b = init_sphere(p, 1);
  EXPECT_EQ(a.rank(), 3);
  EXPECT_EQ(a.dense(), b.dense());
  EXPECT_GT(a.sigma(2), 1e-8);
  EXPECT_LT(ObliqueConstraint(30, 40).value(a.dense()).norm(), 1e-12);
  EXPECT_NE(init_sphere(p, 2).dense(), a.dense());
}

TEST(SphereProblem, FastProjectorMatchesGeneric) {
  auto data = std::make_shared<const SphereFitProblem>(gen_sphere_data(12, 10, 2, 1.5, 11));
  const SphereProblem prob = make_sphere_problem(data);
  ASSERT_TRUE(static_cast<bool>(prob.fast_projector));
  const FactoredPoint x = init_sphere(*data, 3);
  Rng rng(12);
  const Matrix xi = rng.normal_matrix(12, 10);
  EXPECT_LT((prob.fast_projector(x, x.dense(), xi) -
             tangent_intersection_project(prob.manifold, prob.constraint, x, xi)).norm(),
            1e-10 * xi.norm());
}

TEST(HyperbolicData, OnSheetWithExpectedRank) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(20, 50, 4, 1);
  EXPECT_LT(HyperboloidConstraint(20, 50).value(p.Xbar).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(p.Xbar.row(0).minCoeff(), 0.0);
  const Vector s = Eigen::JacobiSVD<Matrix>(p.Xbar).singularValues();
  EXPECT_GT(s(4), 1e-6 * s(0));
  EXPECT_LT(s(5), 1e-12 * s(0));
}

TEST(HyperbolicData, NoiseRaisesRankAndStaysFeasible) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(20, 50, 4, 1, 0.25);
  EXPECT_LT(HyperboloidConstraint(20, 50).value(p.Xbar).cwiseAbs().maxCoeff(), 1e-10);
  const Vector s = Eigen::JacobiSVD<Matrix>(p.Xbar).singularValues();
  EXPECT_GT(s(10), 1e-3 * s(0));
  EXPECT_EQ(gen_hyperbolic_data(20, 50, 4, 1, 0.25).Xbar, p.Xbar);
}

TEST(HyperbolicObjective, SeriesLimit) {
  EXPECT_NEAR(arccosh_ratio(1.0 + 1e-10), 1.0, 1e-8);
  EXPECT_EQ(arccosh_ratio(1.0), 1.0);
  // continuity across the switch
  EXPECT_NEAR(arccosh_ratio(1.0 + 2e-8), arccosh_ratio(1.0 + 0.5e-8), 1e-7);
  EXPECT_NEAR(arccosh_ratio(1.5), std::acosh(1.5) / std::sqrt(1.25), 1e-15);
}

TEST(HyperbolicObjective, ZeroDistanceColumnsHaveNoTangentGradient) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(6, 10, 2, 2);
  EXPECT_NEAR(hyperbolic_objective(p, p.Xbar), 0.0, 1e-12);
  const Matrix G = hyperbolic_grad(p, p.Xbar);
  EXPECT_LT((G + 2.0 * HyperboloidConstraint::apply_J(p.Xbar)).norm(), 1e-6);
  // G is normal to the sheet: its H-tangent part vanishes
  const HyperboloidConstraint H(6, 10);
  const Matrix tangent =
      G - H.adjoint(p.Xbar, H.gram_solve(p.Xbar, H.diff(p.Xbar, G)));
  EXPECT_LT(tangent.norm(), 1e-6);
}

TEST(HyperbolicObjective, GradientMatchesFiniteDifferences) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(6, 10, 3, 3, 0.2);
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const Matrix X = lift_to_hyperboloid(rng.normal_matrix(6, 10));
    expect_gradient_matches_fd(
        [&p](const Matrix &Y) { return hyperbolic_objective(p, Y); },
        [&p](const Matrix &Y) { return hyperbolic_grad(p, Y); }, X,
        rng.normal_matrix(7, 10));
  }
}

TEST(HyperbolicObjective, GradientAtAffinityOnePointFive) {
  // one column with u = 1.5: x = (cosh a, sinh a), xbar = (1, 0), cosh a = 1.5
  HyperbolicFitProblem p;
  p.Xbar = Matrix(2, 1);
  p.Xbar << 1.0, 0.0;
  p.r = 1;
  Matrix X(2, 1);
  X << 1.5, std::sqrt(1.25);
  ASSERT_NEAR(lorentz_affinity(X, p.Xbar)(0), 1.5, 1e-15);
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    expect_gradient_matches_fd(
        [&p](const Matrix &Y) { return hyperbolic_objective(p, Y); },
        [&p](const Matrix &Y) { return hyperbolic_grad(p, Y); }, X,
        rng.normal_matrix(2, 1));
  }
}

TEST(HyperbolicObjective, DomainViolation) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(4, 5, 2, 4);
  try {
    hyperbolic_grad(p, -p.Xbar);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainViolation);
  }
}

TEST(HyperbolicInit, OnSheetLowRankDeterministic) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(20, 40, 4, 5, 0.25);
  const FactoredPoint x = init_hyperbolic(p, 3);
  EXPECT_EQ(x.rank(), 4);
  EXPECT_LT(HyperboloidConstraint(20, 40).value(x.dense()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(init_hyperbolic(p, 3).dense(), x.dense());
}

TEST(HyperbolicInit, ExactForNoiseFreeData) {
  const HyperbolicFitProblem p = gen_hyperbolic_data(20, 40, 4, 6);
  EXPECT_LT((init_hyperbolic(p, 4).dense() - p.Xbar).norm(), 1e-10 * p.Xbar.norm());
}

TEST(HyperbolicProblem, FastProjectorMatchesGeneric) {
  auto data = std::make_shared<const HyperbolicFitProblem>(gen_hyperbolic_data(8, 12, 3, 7, 0.3));
  const HyperbolicProblem prob = make_hyperbolic_problem(data, 2);
  const FactoredPoint x = init_hyperbolic(*data, 2);
  Rng rng(15);
  const Matrix xi = rng.normal_matrix(9, 12);
  EXPECT_LT((prob.fast_projector(x, x.dense(), xi) -
             tangent_intersection_project(prob.manifold, prob.constraint, x, xi)).norm(),
            1e-8 * xi.norm());
}

TEST(ModesProblem, Hamiltonian) {
  const CompressedModesProblem p = gen_modes_problem(256, 15, 50.0, 0.6);
  const double h = 50.0 / 257.0;
  EXPECT_NEAR(p.Aham(0, 0), 1.0 / (h * h), 1e-12);
  EXPECT_NEAR(p.Aham(100, 100), 1.0 / (h * h), 1e-12);
  EXPECT_NEAR(p.Aham(3, 4), -0.5 / (h * h), 1e-12);
  EXPECT_EQ(p.Aham(3, 5), 0.0);
  EXPECT_EQ(p.s, 2304);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(p.Aham).eigenvalues();
  EXPECT_LT(ev(ev.size() - 1), 2.0 / (h * h));
  EXPECT_GT(ev(0), 0.0);
  EXPECT_DOUBLE_EQ(p.default_beta(), 50.0 * 50.0 / (4.0 * 256.0 * 256.0));
}

TEST(ModesProblem, BadParameters) {
  EXPECT_THROW(gen_modes_problem(10, 11, 1.0, 0.5), Error);
  EXPECT_THROW(gen_modes_problem(10, 2, 1.0, 1.5), Error);
}

TEST(ModesObjective, Gradient) {
  const CompressedModesProblem p = gen_modes_problem(20, 3, 10.0, 0.5);
  EXPECT_EQ(modes_grad(p, Matrix::Zero(20, 3)).norm(), 0.0);
  Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    const Matrix X = rng.normal_matrix(20, 3);
    EXPECT_GE(modes_objective(p, X), 0.0);
    expect_gradient_matches_fd(
        [&p](const Matrix &Y) { return modes_objective(p, Y); },
        [&p](const Matrix &Y) { return modes_grad(p, Y); }, X,
        rng.normal_matrix(20, 3));
  }
}

TEST(SparsityRatio, Examples) {
  EXPECT_EQ(sparsity_ratio(Matrix::Ones(4, 3)), 0.0);
  EXPECT_EQ(sparsity_ratio(Matrix::Zero(4, 3)), 1.0);
  Rng rng(17);
  const SupportPoint x = project_sparsity(rng.normal_matrix(4, 3), 5);
  EXPECT_DOUBLE_EQ(sparsity_ratio(x.values), 1.0 - 5.0 / 12.0);
}

TEST(ModesInit, ExactSparsityDeterministic) {
  const CompressedModesProblem p = gen_modes_problem(32, 4, 20.0, 0.5);
  const SupportPoint x = init_modes(p, 3);
  EXPECT_EQ(x.sparsity(), p.s);
  EXPECT_EQ((x.values.array() != 0.0).count(), p.s);
  EXPECT_EQ(init_modes(p, 3).values, x.values);
}
