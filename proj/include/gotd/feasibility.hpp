#pragma once

#include "gotd/common.hpp"
#include "gotd/concepts.hpp"

#include <vector>

namespace gotd {

template <class Point> struct MapResult {
  Point point;
  double feas_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history; // ||h|| after each projection onto M
};

/// Method of alternating projections X <- P_M(P_H(X)), started from P_M(X0)
/// and stopped once ||h(X)|| <= tol. The returned point always comes from the
/// manifold projection, so it satisfies the point invariants of M exactly.
template <InnerManifold M, ConstraintMap H>
MapResult<typename M::Point>
alternating_projections(const M &manifold, const H &constraint,
                        const Matrix &X0, double tol = 1e-10,
                        int max_iter = 1000) {
  MapResult<typename M::Point> out{manifold.project(X0), 0.0, 0, false, {}};
  Matrix dense = manifold.dense(out.point);
  out.feas_norm = constraint.value(dense).norm();
  out.history.push_back(out.feas_norm);
  while (true) {
    if (out.feas_norm <= tol) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= max_iter) {
      return out;
    }
    out.point = manifold.project(constraint.project(dense));
    dense = manifold.dense(out.point);
    out.feas_norm = constraint.value(dense).norm();
    out.history.push_back(out.feas_norm);
    ++out.iterations;
  }
}

} // namespace gotd
