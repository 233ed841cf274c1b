#pragma once

#include "gotd/common.hpp"

#include <concepts>

namespace gotd {

/// The manifold the iterates live on. Points carry whatever representation
/// the manifold prefers; `dense` exposes the ambient matrix.
template <class M>
concept InnerManifold = requires(const M &m, const typename M::Point &x,
                                 const Matrix &z) {
  typename M::Point;
  { m.rows() } -> std::convertible_to<Index>;
  { m.cols() } -> std::convertible_to<Index>;
  { m.dense(x) } -> std::convertible_to<Matrix>;
  { m.tangent_project(x, z) } -> std::convertible_to<Matrix>;
  { m.retract(x, z) } -> std::same_as<typename M::Point>;
  { m.project(z) } -> std::same_as<typename M::Point>;
};

/// A smooth map h: R^{rows x cols} -> R^q whose zero set is the level set H.
template <class H>
concept ConstraintMap = requires(const H &h, const Matrix &x, const Matrix &z,
                                 const Vector &lam) {
  { h.output_dim() } -> std::convertible_to<Index>;
  { h.value(x) } -> std::convertible_to<Vector>;
  { h.diff(x, z) } -> std::convertible_to<Vector>;
  { h.adjoint(x, lam) } -> std::convertible_to<Matrix>;
  { h.gram_solve(x, lam) } -> std::convertible_to<Vector>;
  { h.project(z) } -> std::convertible_to<Matrix>;
};

} // namespace gotd
