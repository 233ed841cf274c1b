#pragma once

#include "gotd/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <functional>
#include <limits>

namespace gotd {

/// Singular values at or below this fraction of the largest one are treated
/// as zero when a rank-r factorization is requested.
inline constexpr double kRankThreshold = 1e-12;

/// Relative eigenvalue cutoff of the pseudo-inverse.
inline constexpr double kPinvCutoff = 1e-12;

inline constexpr double kPcgTolerance = 1e-10;
inline constexpr int kPcgMaxIterations = 200;

/// A linear map on R^dim, applied matrix-free.
struct LinearOperator {
  Index dim = 0;
  std::function<Vector(const Vector &)> apply;
  bool symmetric = false;

  Vector operator()(const Vector &v) const { return apply(v); }
};

/// Thin rank-r factors X ~ U diag(sigma) V^T with nonincreasing sigma.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;
};

inline SvdFactors truncated_svd(const Matrix &X, Index r) {
  if (r <= 0 || r > std::min(X.rows(), X.cols())) {
    throw Error(ErrorKind::ShapeMismatch,
                "truncated_svd: rank " + std::to_string(r) +
                    " out of range for " + std::to_string(X.rows()) + "x" +
                    std::to_string(X.cols()));
  }
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &s = svd.singularValues();
  if (!(s(0) > 0.0) || s(r - 1) <= kRankThreshold * s(0)) {
    throw Error(ErrorKind::RankDeficient,
                "truncated_svd: sigma_r = " + std::to_string(s(r - 1)) +
                    " vs sigma_1 = " + std::to_string(s(0)));
  }
  return {svd.matrixU().leftCols(r), s.head(r), svd.matrixV().leftCols(r)};
}

/// Solves A x = b for symmetric positive definite A. Refuses matrices whose
/// eigenvalue ratio is below 1e-12.
inline Vector spd_solve(const Matrix &A, const Vector &b) {
  check_shape("spd_solve", A.rows(), A.cols(), b.size(), b.size());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  const Vector &d = eig.eigenvalues();
  if (d.size() == 0) {
    return Vector(0);
  }
  if (!(d(d.size() - 1) > 0.0) || d(0) <= kRankThreshold * d(d.size() - 1)) {
    throw Error(ErrorKind::IllConditioned,
                "spd_solve: eigenvalue range [" + std::to_string(d(0)) + ", " +
                    std::to_string(d(d.size() - 1)) + "]");
  }
  Eigen::LLT<Matrix> llt(A);
  Vector x = llt.solve(b);
  // one step of iterative refinement
  x += llt.solve(b - A * x);
  return x;
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix applied to b.
/// Eigenvalues at or below rel_tol * lambda_max are dropped.
inline Vector pinv_apply(const Matrix &A, const Vector &b,
                         double rel_tol = kPinvCutoff) {
  check_shape("pinv_apply", A.rows(), A.cols(), b.size(), b.size());
  if (b.size() == 0) {
    return Vector(0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const Vector &d = eig.eigenvalues();
  const double lmax = d.cwiseAbs().maxCoeff();
  if (lmax == 0.0) {
    return Vector::Zero(b.size());
  }
  const Matrix &Q = eig.eigenvectors();
  Vector c = Q.transpose() * b;
  for (Index i = 0; i < d.size(); ++i) {
    c(i) = d(i) > rel_tol * lmax ? c(i) / d(i) : 0.0;
  }
  return Q * c;
}

struct PcgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for a symmetric PSD operator. On
/// failure to converge the iterate with the smallest residual is returned and
/// `converged` is false.
inline PcgResult
pcg(const LinearOperator &A, const Vector &b,
    const std::function<Vector(const Vector &)> &precond,
    double tol = kPcgTolerance, int max_iter = kPcgMaxIterations) {
  if (b.size() != A.dim) {
    throw Error(ErrorKind::ShapeMismatch, "pcg: right-hand side size");
  }
  PcgResult out;
  out.x = Vector::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  Vector x = Vector::Zero(b.size());
  Vector r = b;
  Vector z = precond(r);
  Vector p = z;
  double rz = r.dot(z);
  double best = 1.0;
  out.relative_residual = 1.0;

  for (int k = 1; k <= max_iter; ++k) {
    const Vector Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      break; // operator not positive definite along p
    }
    const double step = rz / pAp;
    x += step * p;
    r -= step * Ap;
    const double rel = r.norm() / bnorm;
    out.iterations = k;
    if (rel < best) {
      best = rel;
      out.x = x;
      out.relative_residual = rel;
    }
    if (rel <= tol) {
      out.converged = true;
      return out;
    }
    z = precond(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

/// Solves G L + L G = B for symmetric L, with G symmetric positive definite.
inline Matrix sym_sylvester_solve(const Matrix &G, const Matrix &B) {
  check_shape("sym_sylvester_solve", B.rows(), B.cols(), G.rows(), G.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  const Vector &d = eig.eigenvalues();
  if (d.size() == 0) {
    return Matrix(0, 0);
  }
  if (!(d(d.size() - 1) > 0.0) || d(0) <= kRankThreshold * d(d.size() - 1)) {
    throw Error(ErrorKind::IllConditioned,
                "sym_sylvester_solve: Gram matrix not positive definite");
  }
  const Matrix &Q = eig.eigenvectors();
  Matrix C = Q.transpose() * B * Q;
  for (Index j = 0; j < C.cols(); ++j) {
    for (Index i = 0; i < C.rows(); ++i) {
      C(i, j) /= d(i) + d(j);
    }
  }
  Matrix L = Q * C * Q.transpose();
  return 0.5 * (L + L.transpose());
}

} // namespace gotd
