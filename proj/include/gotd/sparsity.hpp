#pragma once

#include "gotd/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gotd {

/// A matrix with exactly s nonzeros. `support` holds row-major linear indices
/// (i * cols + j) in increasing order.
struct SupportPoint {
  Matrix values;
  std::vector<Index> support;

  Index sparsity() const { return static_cast<Index>(support.size()); }
};

/// Keeps the s largest-magnitude entries of Y. Ties go to the smaller
/// row-major index.
inline SupportPoint project_sparsity(const Matrix &Y, Index s) {
  const Index n = Y.size();
  if (s <= 0 || s > n) {
    throw Error(ErrorKind::ShapeMismatch, "project_sparsity: bad sparsity");
  }
  const Index cols = Y.cols();
  auto at = [&](Index k) { return Y(k / cols, k % cols); };

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + s, order.end(),
                    [&](Index a, Index b) {
                      const double ma = std::abs(at(a));
                      const double mb = std::abs(at(b));
                      return ma > mb || (ma == mb && a < b);
                    });
  order.resize(static_cast<size_t>(s));
  if (at(order.back()) == 0.0) {
    throw Error(ErrorKind::DegenerateStep,
                "project_sparsity: fewer than s nonzero entries");
  }
  std::sort(order.begin(), order.end());

  SupportPoint out{Matrix::Zero(Y.rows(), Y.cols()), std::move(order)};
  for (Index k : out.support) {
    out.values(k / cols, k % cols) = at(k);
  }
  return out;
}

/// The set C_s of rows x cols matrices with exactly s nonzeros. Its tangent
/// space at X is the set of matrices supported on supp(X).
class SparsityManifold {
public:
  using Point = SupportPoint;

  SparsityManifold(Index rows, Index cols, Index s)
      : rows_(rows), cols_(cols), s_(s) {
    if (s <= 0 || s > rows * cols) {
      throw Error(ErrorKind::ShapeMismatch, "SparsityManifold: bad sparsity");
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index sparsity() const { return s_; }

  Matrix dense(const Point &x) const { return x.values; }

  Matrix tangent_project(const Point &x, const Matrix &Z) const {
    check_shape("SparsityManifold::tangent_project", Z.rows(), Z.cols(),
                rows_, cols_);
    Matrix out = Matrix::Zero(rows_, cols_);
    for (Index k : x.support) {
      out(k / cols_, k % cols_) = Z(k / cols_, k % cols_);
    }
    return out;
  }

  Point retract(const Point &x, const Matrix &eta) const {
    check_shape("SparsityManifold::retract", eta.rows(), eta.cols(), rows_,
                cols_);
    return project_sparsity(x.values + eta, s_);
  }

  Point project(const Matrix &Y) const {
    check_shape("SparsityManifold::project", Y.rows(), Y.cols(), rows_, cols_);
    return project_sparsity(Y, s_);
  }

private:
  Index rows_;
  Index cols_;
  Index s_;
};

} // namespace gotd
