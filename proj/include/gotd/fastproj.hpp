#pragma once

#include "gotd/common.hpp"
#include "gotd/fixed_rank.hpp"
#include "gotd/solvers.hpp"

namespace gotd {

/// Factored data for projecting onto the tangent space of the matrix
/// hyperboloid intersected with the rank-s manifold at X = U S V^T.
/// J X = U P + Q with P = U^T J X and Q = (I - UU^T) J X.
struct HypLowRankWorkspace {
  Matrix U;   // (n+1) x s
  Matrix P;   // s x m
  Matrix Q;   // (n+1) x m
  Vector D_P; // squared column norms of P
  Matrix V;   // m x s
};

/// `signature` is the diagonal of J.
inline HypLowRankWorkspace build_workspace(const FactoredPoint &X,
                                           const Vector &signature) {
  if (signature.size() != X.U.rows() || X.V.cols() != X.U.cols() ||
      X.sigma.size() != X.U.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "build_workspace: shapes");
  }
  HypLowRankWorkspace ws;
  ws.U = X.U;
  ws.V = X.V;
  const Matrix JX = signature.asDiagonal() * X.dense();
  ws.P = X.U.transpose() * JX;
  ws.Q = JX - X.U * ws.P;
  ws.D_P = ws.P.colwise().squaredNorm().transpose();
  return ws;
}

/// A w = D_P w + sum_l V_l .* (Q^T (Q (V_l .* w))).
inline Vector apply_A(const HypLowRankWorkspace &ws, const Vector &w) {
  if (w.size() != ws.V.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "apply_A: vector length");
  }
  Vector out = ws.D_P.cwiseProduct(w);
  for (Index l = 0; l < ws.V.cols(); ++l) {
    const Vector vw = ws.V.col(l).cwiseProduct(w);
    out += ws.V.col(l).cwiseProduct(ws.Q.transpose() * (ws.Q * vw));
  }
  return out;
}

/// A = Diag(D_P) + (Q^T Q) .* (V V^T). Test and diagnostics only; the solver
/// never forms it.
inline Matrix assemble_A_dense(const HypLowRankWorkspace &ws) {
  Matrix A = (ws.Q.transpose() * ws.Q).cwiseProduct(ws.V * ws.V.transpose());
  A = (0.5 * (A + A.transpose())).eval(); // bitwise symmetric
  A.diagonal() += ws.D_P;
  return A;
}

/// diag(A)_i = ||P_i||^2 + ||Q_i||^2 ||V_{i,:}||^2, without forming A.
inline Vector diag_A(const HypLowRankWorkspace &ws) {
  return ws.D_P + ws.Q.colwise().squaredNorm().transpose().cwiseProduct(
                      ws.V.rowwise().squaredNorm());
}

struct HypProjection {
  Matrix value;
  PcgResult solve;
};

/// Projection of xi onto T_{H ∩ M_s}(X): with eta = P_{T_M}(xi) and
/// b_i = (JX_i)^T eta_i, solve A lam = b by Jacobi-preconditioned CG and
/// return eta - U (P Diag(lam)) - (Q Diag(lam) V) V^T.
inline HypProjection project_hyp_lowrank(const FactoredPoint &X,
                                         const HypLowRankWorkspace &ws,
                                         const Matrix &xi,
                                         double tol = kPcgTolerance,
                                         int max_iter = kPcgMaxIterations) {
  const Index rows = ws.U.rows();
  const Index cols = ws.V.rows();
  check_shape("project_hyp_lowrank", xi.rows(), xi.cols(), rows, cols);
  const FixedRankManifold manifold(rows, cols, ws.U.cols());
  const Matrix eta = manifold.tangent_project(X, xi);

  const Matrix JX = ws.U * ws.P + ws.Q;
  const Vector b = (JX.array() * eta.array()).colwise().sum().transpose();

  const LinearOperator A{cols, [&ws](const Vector &w) { return apply_A(ws, w); },
                         true};
  const Vector inv_diag = diag_A(ws).cwiseInverse();
  PcgResult solve =
      pcg(A, b, [&inv_diag](const Vector &r) -> Vector {
            return inv_diag.cwiseProduct(r);
          },
          tol, max_iter);

  const auto lam = solve.x.asDiagonal();
  Matrix value =
      eta - ws.U * (ws.P * lam) - (ws.Q * lam * ws.V) * ws.V.transpose();
  return {std::move(value), std::move(solve)};
}

inline constexpr double kHypProjectionTolerance = 1e-13;

/// Projector for (hyperboloid, fixed-rank) problems. Throws NotConverged if
/// the inner CG solve stalls.
inline auto make_hyp_lowrank_projector(Vector signature,
                                       double tol = kHypProjectionTolerance,
                                       int max_iter = kPcgMaxIterations) {
  return [signature = std::move(signature), tol,
          max_iter](const FactoredPoint &x, const Matrix & /*dense*/,
                    const Matrix &xi) -> Matrix {
    const HypLowRankWorkspace ws = build_workspace(x, signature);
    HypProjection proj = project_hyp_lowrank(x, ws, xi, tol, max_iter);
    if (!proj.solve.converged) {
      throw Error(ErrorKind::NotConverged,
                  "project_hyp_lowrank: CG residual " +
                      std::to_string(proj.solve.relative_residual));
    }
    return std::move(proj.value);
  };
}

/// Closed-form projection onto T_{Ob ∩ M_r}(X). Each row of Diag(c) X lies in
/// the row space of V, so P_{T_M} ∘ Dh^* = Dh^* and the Gram system is
/// diagonal: the result is eta - Diag(<X_i, eta_i> / ||X_i||^2) X.
inline Matrix project_oblique_lowrank(const FactoredPoint &x,
                                      const Matrix &dense, const Matrix &xi) {
  const FixedRankManifold manifold(dense.rows(), dense.cols(), x.rank());
  const Matrix eta = manifold.tangent_project(x, xi);
  const Vector row_sq = dense.rowwise().squaredNorm();
  if ((row_sq.array() == 0.0).any()) {
    throw Error(ErrorKind::IllConditioned, "project_oblique_lowrank: zero row");
  }
  const Vector c =
      (dense.array() * eta.array()).rowwise().sum().matrix().cwiseQuotient(row_sq);
  return eta - c.asDiagonal() * dense;
}

} // namespace gotd
