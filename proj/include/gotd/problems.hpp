#pragma once

#include "gotd/algorithm.hpp"
#include "gotd/common.hpp"
#include "gotd/constraints.hpp"
#include "gotd/fastproj.hpp"
#include "gotd/fixed_rank.hpp"
#include "gotd/rng.hpp"
#include "gotd/sparsity.hpp"

#include <Eigen/QR>

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

namespace gotd {

/// Q factor of the thin QR decomposition of Y.
inline Matrix q_factor(const Matrix &Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

// ---------------------------------------------------------------------------
// Low-rank approximation of spherical data: Ob(m, n) ∩ M_r.

struct Entry {
  Index row;
  Index col;
};

struct SphereFitProblem {
  Matrix A;                 // ground truth with unit rows
  std::vector<Entry> omega; // observed (training) entries
  std::vector<Entry> gamma; // disjoint test entries, |gamma| = |omega|
  Index r = 0;
};

inline Index sphere_sample_size(Index m, Index n, Index r, double os) {
  return static_cast<Index>(std::llround(os * static_cast<double>(r * (m + n - r))));
}

inline SphereFitProblem gen_sphere_data(Index m, Index n, Index r, double os,
                                        std::uint64_t seed) {
  const Index count = sphere_sample_size(m, n, r, os);
  if (2 * count > m * n) {
    throw Error(ErrorKind::InfeasibleSampling,
                "gen_sphere_data: 2|Omega| = " + std::to_string(2 * count) +
                    " exceeds m*n = " + std::to_string(m * n));
  }
  const Rng root(seed);
  Rng rng_u = root.split(1);
  Rng rng_v = root.split(2);
  Rng rng_s = root.split(3);
  Rng rng_idx = root.split(4);

  const Matrix U = q_factor(rng_u.normal_matrix(m, r));
  const Matrix V = q_factor(rng_v.normal_matrix(n, r));
  Vector sigma(r);
  for (Index i = 0; i < r; ++i) {
    sigma(i) = rng_s.uniform();
  }

  SphereFitProblem prob;
  prob.r = r;
  prob.A = ObliqueConstraint(m, n).project(U * sigma.asDiagonal() * V.transpose());

  // partial Fisher-Yates over row-major linear indices
  std::vector<Index> idx(static_cast<size_t>(m * n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index k = 0; k < 2 * count; ++k) {
    const auto pick = k + static_cast<Index>(rng_idx.uniform_index(
                              static_cast<std::uint64_t>(m * n - k)));
    std::swap(idx[static_cast<size_t>(k)], idx[static_cast<size_t>(pick)]);
  }
  prob.omega.reserve(static_cast<size_t>(count));
  prob.gamma.reserve(static_cast<size_t>(count));
  for (Index k = 0; k < 2 * count; ++k) {
    const Index lin = idx[static_cast<size_t>(k)];
    (k < count ? prob.omega : prob.gamma).push_back({lin / n, lin % n});
  }
  return prob;
}

/// 1/2 ||P_Omega(X - A)||^2
inline double sphere_objective(const SphereFitProblem &prob, const Matrix &X) {
  double acc = 0.0;
  for (const Entry &e : prob.omega) {
    const double d = X(e.row, e.col) - prob.A(e.row, e.col);
    acc += d * d;
  }
  return 0.5 * acc;
}

/// P_Omega(X - A)
inline Matrix sphere_grad(const SphereFitProblem &prob, const Matrix &X) {
  Matrix G = Matrix::Zero(prob.A.rows(), prob.A.cols());
  for (const Entry &e : prob.omega) {
    G(e.row, e.col) = X(e.row, e.col) - prob.A(e.row, e.col);
  }
  return G;
}

/// ||P_Gamma(X - A)|| / ||P_Gamma(A)||
inline double sphere_test_error(const SphereFitProblem &prob, const Matrix &X) {
  double num = 0.0;
  double den = 0.0;
  for (const Entry &e : prob.gamma) {
    const double a = prob.A(e.row, e.col);
    const double d = X(e.row, e.col) - a;
    num += d * d;
    den += a * a;
  }
  return std::sqrt(num / den);
}

/// X0 = P_{M_r}(H0 V0^T) with V0 orthonormal and H0 a row-normalized
/// Gaussian matrix.
inline FactoredPoint init_sphere(const SphereFitProblem &prob,
                                 std::uint64_t seed) {
  const Index m = prob.A.rows();
  const Index n = prob.A.cols();
  const Rng root(seed);
  Rng rng_v = root.split(11);
  Rng rng_h = root.split(12);
  const Matrix V0 = q_factor(rng_v.normal_matrix(n, prob.r));
  const Matrix H0 = ObliqueConstraint(m, prob.r).project(rng_h.normal_matrix(m, prob.r));
  return project_fixed_rank(H0 * V0.transpose(), prob.r);
}

using SphereProblem = Problem<FixedRankManifold, ObliqueConstraint>;

inline SphereProblem make_sphere_problem(std::shared_ptr<const SphereFitProblem> data) {
  const Index m = data->A.rows();
  const Index n = data->A.cols();
  SphereProblem p{FixedRankManifold(m, n, data->r), ObliqueConstraint(m, n),
                  [data](const Matrix &X) { return sphere_objective(*data, X); },
                  [data](const Matrix &X) { return sphere_grad(*data, X); },
                  project_oblique_lowrank};
  return p;
}

// ---------------------------------------------------------------------------
// Low-rank approximation of hyperbolic embeddings: H^m_n ∩ M_{r+1}.

struct HyperbolicFitProblem {
  Matrix Xbar; // (n+1) x m, columns on the upper hyperboloid sheet
  Index r = 0; // rank parameter; the manifold rank is r + 1
};

/// [sqrt(1 + ||z||^2); z] for every column z.
inline Matrix lift_to_hyperboloid(const Matrix &Z) {
  Matrix out(Z.rows() + 1, Z.cols());
  out.row(0) = (1.0 + Z.colwise().squaredNorm().array()).sqrt().matrix();
  out.bottomRows(Z.rows()) = Z;
  return out;
}

/// Synthetic embeddings: latent Gaussian points z' (scale 0.5) in R^{r_true},
/// mapped isometrically into R^n by a random orthonormal frame, optionally
/// perturbed by `noise` * N(0, I_n), then lifted onto H_n. With noise = 0
/// the matrix has rank r_true + 1.
inline HyperbolicFitProblem gen_hyperbolic_data(Index n, Index m, Index r_true,
                                                std::uint64_t seed,
                                                double noise = 0.0) {
  const Rng root(seed);
  Rng rng_z = root.split(21);
  Rng rng_w = root.split(22);
  Rng rng_e = root.split(23);
  const Matrix Zp = 0.5 * rng_z.normal_matrix(r_true, m);
  const Matrix W = q_factor(rng_w.normal_matrix(n, r_true));
  Matrix spatial = W * Zp;
  if (noise > 0.0) {
    spatial += noise * rng_e.normal_matrix(n, m);
  }
  return {lift_to_hyperboloid(spatial), r_true};
}

/// u_i = -<x_i, xbar_i>_J
inline Vector lorentz_affinity(const Matrix &X, const Matrix &Xbar) {
  return -(HyperboloidConstraint::apply_J(X).array() * Xbar.array())
              .colwise()
              .sum()
              .transpose();
}

inline constexpr double kLorentzSlack = 1e-9;
inline constexpr double kSeriesSwitch = 1e-8;

/// arccosh(u) / sqrt(u^2 - 1), replaced by 1 - (u - 1)/3 close to u = 1.
inline double arccosh_ratio(double u) {
  if (u <= 1.0 + kSeriesSwitch) {
    return 1.0 - (u - 1.0) / 3.0;
  }
  return std::acosh(u) / std::sqrt(u * u - 1.0);
}

/// sum_i arccosh(-<x_i, xbar_i>_J)^2, affinities clamped at 1 from below.
inline double hyperbolic_objective(const HyperbolicFitProblem &prob,
                                   const Matrix &X) {
  const Vector u = lorentz_affinity(X, prob.Xbar);
  double f = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double d = std::acosh(std::max(u(i), 1.0));
    f += d * d;
  }
  return f;
}

/// Column i: -2 g(u_i) J xbar_i with g(u) = arccosh(u) / sqrt(u^2 - 1).
inline Matrix hyperbolic_grad(const HyperbolicFitProblem &prob,
                              const Matrix &X) {
  const Vector u = lorentz_affinity(X, prob.Xbar);
  Vector coeff(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    if (u(i) < 1.0 - kLorentzSlack) {
      throw Error(ErrorKind::DomainViolation,
                  "hyperbolic_grad: Lorentz affinity " + std::to_string(u(i)) +
                      " < 1 in column " + std::to_string(i));
    }
    coeff(i) = -2.0 * arccosh_ratio(std::max(u(i), 1.0));
  }
  return HyperboloidConstraint::apply_J(prob.Xbar) * coeff.asDiagonal();
}

/// Lift initialization: U_r = top-r left singular vectors of the spatial
/// block of Xbar, z'_i = U_r^T xbar'_i lifted onto H_r, mapped back through
/// [1 0; 0 U_r] and factored at rank r + 1.
inline FactoredPoint init_hyperbolic(const HyperbolicFitProblem &prob,
                                     Index r) {
  const Index n = prob.Xbar.rows() - 1;
  const Matrix spatial = prob.Xbar.bottomRows(n);
  const Matrix Ur = truncated_svd(spatial, r).U;
  const Matrix Zbar = lift_to_hyperboloid(Ur.transpose() * spatial);
  Matrix X0(n + 1, prob.Xbar.cols());
  X0.row(0) = Zbar.row(0);
  X0.bottomRows(n) = Ur * Zbar.bottomRows(r);
  return project_fixed_rank(X0, r + 1);
}

using HyperbolicProblem = Problem<FixedRankManifold, HyperboloidConstraint>;

inline HyperbolicProblem
make_hyperbolic_problem(std::shared_ptr<const HyperbolicFitProblem> data,
                        Index r) {
  const Index n = data->Xbar.rows() - 1;
  const Index m = data->Xbar.cols();
  const HyperboloidConstraint constraint(n, m);
  HyperbolicProblem p{
      FixedRankManifold(n + 1, m, r + 1), constraint,
      [data](const Matrix &X) { return hyperbolic_objective(*data, X); },
      [data](const Matrix &X) { return hyperbolic_grad(*data, X); },
      make_hyp_lowrank_projector(constraint.signature())};
  return p;
}

// ---------------------------------------------------------------------------
// Compressed modes: St(n, p) ∩ C_s.

struct CompressedModesProblem {
  Matrix Aham; // n x n discretized -1/2 d^2/dx^2 on [0, L], Dirichlet
  Index n = 0;
  Index p = 0;
  Index s = 0;
  double L = 0.0;
  double rho = 0.0;

  /// L^2 / (4 n^2), i.e. about 1 / (2 lambda_max(Aham)).
  double default_beta() const {
    return L * L / (4.0 * static_cast<double>(n) * static_cast<double>(n));
  }
};

inline CompressedModesProblem gen_modes_problem(Index n, Index p, double L,
                                                double rho) {
  if (n <= 0 || p <= 0 || p > n || !(L > 0.0) || !(rho > 0.0) || !(rho <= 1.0)) {
    throw Error(ErrorKind::UsageError, "gen_modes_problem: bad parameters");
  }
  CompressedModesProblem prob;
  prob.n = n;
  prob.p = p;
  prob.L = L;
  prob.rho = rho;
  prob.s = static_cast<Index>(std::llround(rho * static_cast<double>(n * p)));
  const double h = L / static_cast<double>(n + 1);
  const double scale = 1.0 / (2.0 * h * h);
  prob.Aham = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    prob.Aham(i, i) = 2.0 * scale;
    if (i + 1 < n) {
      prob.Aham(i, i + 1) = -scale;
      prob.Aham(i + 1, i) = -scale;
    }
  }
  return prob;
}

/// tr(X^T A X)
inline double modes_objective(const CompressedModesProblem &prob,
                              const Matrix &X) {
  return (X.array() * (prob.Aham * X).array()).sum();
}

inline Matrix modes_grad(const CompressedModesProblem &prob, const Matrix &X) {
  return 2.0 * prob.Aham * X;
}

/// Fraction of exactly-zero entries.
inline double sparsity_ratio(const Matrix &X) {
  const auto nnz = (X.array() != 0.0).count();
  return static_cast<double>(X.size() - nnz) / static_cast<double>(X.size());
}

/// Random orthonormal frame hard-thresholded onto C_s.
inline SupportPoint init_modes(const CompressedModesProblem &prob,
                               std::uint64_t seed) {
  Rng rng = Rng(seed).split(31);
  return project_sparsity(q_factor(rng.normal_matrix(prob.n, prob.p)), prob.s);
}

using ModesProblem = Problem<SparsityManifold, StiefelConstraint>;

inline ModesProblem
make_modes_problem(std::shared_ptr<const CompressedModesProblem> data) {
  ModesProblem p{SparsityManifold(data->n, data->p, data->s),
                 StiefelConstraint(data->n, data->p),
                 [data](const Matrix &X) { return modes_objective(*data, X); },
                 [data](const Matrix &X) { return modes_grad(*data, X); },
                 {}};
  return p;
}

} // namespace gotd
