#pragma once

#include "gotd/common.hpp"
#include "gotd/solvers.hpp"

#include <Eigen/QR>

namespace gotd {

/// Rank-r point stored as its thin SVD U diag(sigma) V^T.
struct FactoredPoint {
  Matrix U;
  Vector sigma;
  Matrix V;

  Index rank() const { return sigma.size(); }
  Matrix dense() const { return U * sigma.asDiagonal() * V.transpose(); }
};

/// The manifold of rows x cols matrices of rank exactly r.
class FixedRankManifold {
public:
  using Point = FactoredPoint;

  FixedRankManifold(Index rows, Index cols, Index rank)
      : rows_(rows), cols_(cols), rank_(rank) {
    if (rank <= 0 || rank > std::min(rows, cols)) {
      throw Error(ErrorKind::ShapeMismatch, "FixedRankManifold: bad rank");
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }

  Matrix dense(const Point &x) const { return x.dense(); }

  /// UU^T Z + Z VV^T - UU^T Z VV^T
  Matrix tangent_project(const Point &x, const Matrix &Z) const {
    check_point(x);
    check_shape("FixedRankManifold::tangent_project", Z.rows(), Z.cols(),
                rows_, cols_);
    const Matrix UtZ = x.U.transpose() * Z;    // r x n
    const Matrix ZV = Z * x.V;                 // m x r
    const Matrix UtZV = UtZ * x.V;             // r x r
    return x.U * UtZ + (ZV - x.U * UtZV) * x.V.transpose();
  }

  /// Norm of the component of Z normal to the tangent space at x.
  double normal_component(const Point &x, const Matrix &Z) const {
    return (Z - tangent_project(x, Z)).norm();
  }

  /// Metric-projection retraction: best rank-r approximation of X + eta,
  /// computed on the 2r x 2r core spanned by [U, (I-UU^T) eta V] and
  /// [V, (I-VV^T) eta^T U]. eta must be tangent at x.
  Point retract(const Point &x, const Matrix &eta) const {
    check_point(x);
    check_shape("FixedRankManifold::retract", eta.rows(), eta.cols(), rows_,
                cols_);
    const double off = normal_component(x, eta);
    if (off > 1e-8 * std::max(1.0, eta.norm())) {
      throw Error(ErrorKind::NotTangent,
                  "FixedRankManifold::retract: normal component " +
                      std::to_string(off));
    }
    const Index r = rank_;
    const Matrix M = x.U.transpose() * eta * x.V;
    const Matrix Up = eta * x.V - x.U * M;
    const Matrix Vp = eta.transpose() * x.U - x.V * M.transpose();

    Matrix left(rows_, 2 * r);
    left << x.U, Up;
    Matrix right(cols_, 2 * r);
    right << x.V, Vp;

    // X + eta = [U Up] [[S + M, I], [I, 0]] [V Vp]^T
    Matrix core = Matrix::Zero(2 * r, 2 * r);
    core.topLeftCorner(r, r) = M;
    core.topLeftCorner(r, r).diagonal() += x.sigma;
    core.topRightCorner(r, r).setIdentity();
    core.bottomLeftCorner(r, r).setIdentity();

    Eigen::HouseholderQR<Matrix> qr_left(left);
    Eigen::HouseholderQR<Matrix> qr_right(right);
    const Index kl = std::min(rows_, 2 * r);
    const Index kr = std::min(cols_, 2 * r);
    const Matrix Ql = qr_left.householderQ() * Matrix::Identity(rows_, kl);
    const Matrix Qr = qr_right.householderQ() * Matrix::Identity(cols_, kr);
    const Matrix Rl =
        qr_left.matrixQR().topRows(kl).triangularView<Eigen::Upper>();
    const Matrix Rr =
        qr_right.matrixQR().topRows(kr).triangularView<Eigen::Upper>();

    const Matrix small = Rl * core * Rr.transpose();
    Eigen::JacobiSVD<Matrix> svd(small,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector &s = svd.singularValues();
    if (!(s(0) > 0.0) || s(r - 1) <= kRankThreshold * s(0)) {
      throw Error(ErrorKind::RankDeficient,
                  "FixedRankManifold::retract: step left the rank-r stratum");
    }
    return {Ql * svd.matrixU().leftCols(r), s.head(r),
            Qr * svd.matrixV().leftCols(r)};
  }

  /// Best rank-r approximation (Eckart-Young).
  Point project(const Matrix &Y) const {
    check_shape("FixedRankManifold::project", Y.rows(), Y.cols(), rows_,
                cols_);
    SvdFactors f = truncated_svd(Y, rank_);
    return {std::move(f.U), std::move(f.sigma), std::move(f.V)};
  }

private:
  void check_point(const Point &x) const {
    if (x.U.rows() != rows_ || x.V.rows() != cols_ || x.U.cols() != rank_ ||
        x.V.cols() != rank_ || x.sigma.size() != rank_) {
      throw Error(ErrorKind::ShapeMismatch,
                  "FixedRankManifold: factored point has wrong shape");
    }
  }

  Index rows_;
  Index cols_;
  Index rank_;
};

inline FactoredPoint project_fixed_rank(const Matrix &Y, Index r) {
  return FixedRankManifold(Y.rows(), Y.cols(), r).project(Y);
}

} // namespace gotd
