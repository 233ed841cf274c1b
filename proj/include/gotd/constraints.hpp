#pragma once

#include "gotd/common.hpp"
#include "gotd/solvers.hpp"

#include <cmath>
#include <numbers>

namespace gotd {

/// Oblique constraint h_i(X) = ||row_i(X)||^2 - 1, q = rows.
class ObliqueConstraint {
public:
  ObliqueConstraint(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index output_dim() const { return rows_; }

  Vector value(const Matrix &X) const {
    check(X);
    return X.rowwise().squaredNorm().array() - 1.0;
  }

  /// 2 ddiag(X Z^T)
  Vector diff(const Matrix &X, const Matrix &Z) const {
    check(X);
    check(Z);
    return 2.0 * (X.array() * Z.array()).rowwise().sum().matrix();
  }

  /// 2 Diag(lam) X
  Matrix adjoint(const Matrix &X, const Vector &lam) const {
    check(X);
    return 2.0 * lam.asDiagonal() * X;
  }

  /// (Dh Dh^*)^{-1} b, the Gram operator being 4 Diag(||row_i||^2).
  Vector gram_solve(const Matrix &X, const Vector &b) const {
    check(X);
    const Vector g = 4.0 * X.rowwise().squaredNorm();
    if ((g.array() == 0.0).any()) {
      throw Error(ErrorKind::IllConditioned, "ObliqueConstraint: zero row");
    }
    return b.cwiseQuotient(g);
  }

  /// Row normalization.
  Matrix project(const Matrix &Y) const {
    check(Y);
    const Vector norms = Y.rowwise().norm();
    if ((norms.array() == 0.0).any()) {
      throw Error(ErrorKind::DegenerateProjection,
                  "ObliqueConstraint::project: zero row");
    }
    return norms.cwiseInverse().asDiagonal() * Y;
  }

private:
  void check(const Matrix &X) const {
    check_shape("ObliqueConstraint", X.rows(), X.cols(), rows_, cols_);
  }

  Index rows_;
  Index cols_;
};

/// Matrix hyperboloid: columns of a (n+1) x m matrix on the upper sheet
/// {x : x^T J x = -1, x_0 > 0}, J = Diag(-1, 1, ..., 1).
/// h_j(X) = X_j^T J X_j + 1, q = m.
class HyperboloidConstraint {
public:
  /// `spatial_dim` is n; matrices have n + 1 rows.
  HyperboloidConstraint(Index spatial_dim, Index points)
      : n_(spatial_dim), m_(points) {}

  Index rows() const { return n_ + 1; }
  Index cols() const { return m_; }
  Index output_dim() const { return m_; }

  /// Diagonal of the Lorentz signature J.
  Vector signature() const {
    Vector j = Vector::Ones(n_ + 1);
    j(0) = -1.0;
    return j;
  }

  static Matrix apply_J(const Matrix &X) {
    Matrix out = X;
    out.row(0) *= -1.0;
    return out;
  }

  Vector value(const Matrix &X) const {
    check(X);
    return (X.array() * apply_J(X).array()).colwise().sum().transpose() + 1.0;
  }

  /// 2 ddiag(X^T J Z)
  Vector diff(const Matrix &X, const Matrix &Z) const {
    check(X);
    check(Z);
    return 2.0 * (apply_J(X).array() * Z.array()).colwise().sum().transpose();
  }

  /// 2 J X Diag(lam)
  Matrix adjoint(const Matrix &X, const Vector &lam) const {
    check(X);
    return 2.0 * apply_J(X) * lam.asDiagonal();
  }

  /// The Gram operator is 4 Diag(||X_j||^2) since J^2 = I.
  Vector gram_solve(const Matrix &X, const Vector &b) const {
    check(X);
    const Vector g = 4.0 * X.colwise().squaredNorm().transpose();
    if ((g.array() == 0.0).any()) {
      throw Error(ErrorKind::IllConditioned,
                  "HyperboloidConstraint: zero column");
    }
    return b.cwiseQuotient(g);
  }

  /// Column-wise closest point on the upper sheet.
  Matrix project(const Matrix &Y) const {
    check(Y);
    Matrix X(Y.rows(), Y.cols());
    for (Index j = 0; j < Y.cols(); ++j) {
      X.col(j) = project_column(Y.col(j));
    }
    return X;
  }

  /// Closest point x = (I + mu J)^{-1} y with mu in (-1, 1) solving
  /// phi(mu) = x^T J x + 1 = 0. phi is strictly decreasing there.
  static Vector project_column(const Vector &y) {
    const double a = y(0) * y(0);
    const double b = y.tail(y.size() - 1).squaredNorm();
    const bool root_exists = a > 0.0 && (b > 0.0 || a < 4.0);
    if (!root_exists) {
      throw Error(ErrorKind::DegenerateProjection,
                  "HyperboloidConstraint::project: no admissible multiplier");
    }
    auto phi = [&](double mu) {
      return -a / ((1 - mu) * (1 - mu)) + b / ((1 + mu) * (1 + mu)) + 1.0;
    };
    auto dphi = [&](double mu) {
      return -2.0 * a / std::pow(1 - mu, 3) - 2.0 * b / std::pow(1 + mu, 3);
    };

    double lo = -1.0;
    double hi = 1.0;
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double f = phi(mu);
      if (f == 0.0) {
        break;
      }
      if (f > 0.0) {
        lo = mu;
      } else {
        hi = mu;
      }
      double next = mu - f / dphi(mu);
      if (!(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
      }
      if (std::abs(next - mu) <= 4 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(mu))) {
        mu = next;
        break;
      }
      mu = next;
    }

    Vector x(y.size());
    x(0) = std::abs(y(0) / (1 - mu));
    x.tail(y.size() - 1) = y.tail(y.size() - 1) / (1 + mu);
    const double lorentz = -x(0) * x(0) + x.tail(x.size() - 1).squaredNorm();
    if (lorentz < 0.0) {
      x /= std::sqrt(-lorentz); // remove root-finding residue
    }
    return x;
  }

private:
  void check(const Matrix &X) const {
    check_shape("HyperboloidConstraint", X.rows(), X.cols(), n_ + 1, m_);
  }

  Index n_;
  Index m_;
};

/// Number of free entries of a symmetric p x p matrix.
inline Index sym_dim(Index p) { return p * (p + 1) / 2; }

/// Isometric flattening of a symmetric matrix: upper triangle in column
/// order, off-diagonal entries scaled by sqrt(2).
inline Vector flatten_sym(const Matrix &S) {
  const Index p = S.rows();
  Vector v(sym_dim(p));
  Index k = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      v(k++) = i == j ? S(i, i) : std::numbers::sqrt2 * 0.5 * (S(i, j) + S(j, i));
    }
  }
  return v;
}

inline Matrix unflatten_sym(const Vector &v, Index p) {
  if (v.size() != sym_dim(p)) {
    throw Error(ErrorKind::ShapeMismatch, "unflatten_sym: length");
  }
  Matrix S(p, p);
  Index k = 0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double value = i == j ? v(k) : v(k) / std::numbers::sqrt2;
      S(i, j) = value;
      S(j, i) = value;
      ++k;
    }
  }
  return S;
}

/// Stiefel constraint h(X) = flatten_sym(X^T X - I_p), q = p(p+1)/2.
class StiefelConstraint {
public:
  StiefelConstraint(Index n, Index p) : n_(n), p_(p) {}

  Index rows() const { return n_; }
  Index cols() const { return p_; }
  Index output_dim() const { return sym_dim(p_); }

  Vector value(const Matrix &X) const {
    check(X);
    return flatten_sym(X.transpose() * X - Matrix::Identity(p_, p_));
  }

  Vector diff(const Matrix &X, const Matrix &Z) const {
    check(X);
    check(Z);
    const Matrix XtZ = X.transpose() * Z;
    return flatten_sym(XtZ + XtZ.transpose());
  }

  /// 2 X unflatten_sym(lam)
  Matrix adjoint(const Matrix &X, const Vector &lam) const {
    check(X);
    return 2.0 * X * unflatten_sym(lam, p_);
  }

  /// Solves 2(G L + L G) = unflatten_sym(b), G = X^T X.
  Vector gram_solve(const Matrix &X, const Vector &b) const {
    check(X);
    const Matrix G = X.transpose() * X;
    return flatten_sym(sym_sylvester_solve(G, 0.5 * unflatten_sym(b, p_)));
  }

  /// Polar factor of Y.
  Matrix project(const Matrix &Y) const {
    check(Y);
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector &s = svd.singularValues();
    if (!(s(0) > 0.0) || s(p_ - 1) <= kRankThreshold * s(0)) {
      throw Error(ErrorKind::DegenerateProjection,
                  "StiefelConstraint::project: rank-deficient input");
    }
    return svd.matrixU() * svd.matrixV().transpose();
  }

private:
  void check(const Matrix &X) const {
    check_shape("StiefelConstraint", X.rows(), X.cols(), n_, p_);
  }

  Index n_;
  Index p_;
};

} // namespace gotd
