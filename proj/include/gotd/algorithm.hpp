#pragma once

#include "gotd/common.hpp"
#include "gotd/concepts.hpp"
#include "gotd/solvers.hpp"
#include "gotd/trace.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gotd {

/// Largest constraint dimension accepted by the dense tangent-intersection
/// projector; beyond it a specialized projector must be supplied.
inline constexpr Index kMaxDenseConstraintDim = 4096;

/// minimize f(X) subject to h(X) = 0 and X in M.
template <InnerManifold M, ConstraintMap H> struct Problem {
  using Manifold = M;
  using Constraint = H;
  using Point = typename M::Point;
  /// (point, dense point, xi) -> projection of xi onto S(X).
  using Projector =
      std::function<Matrix(const Point &, const Matrix &, const Matrix &)>;

  M manifold;
  H constraint;
  std::function<double(const Matrix &)> objective;
  std::function<Matrix(const Matrix &)> gradient;
  Projector fast_projector; // empty: use tangent_intersection_project
};

struct GotdConfig {
  double alpha = 1.0; // feasibility step
  double beta = 1.0;  // optimality step
  int max_iter = 1000;
  double tol = 1e-10; // on max(||G_h||, ||G_f||)
  int trace_every = 1;
  std::uint64_t seed = 0;
};

enum class RunStatus { Converged, MaxIter, Aborted };

inline const char *to_string(RunStatus s) {
  switch (s) {
  case RunStatus::Converged:
    return "Converged";
  case RunStatus::MaxIter:
    return "MaxIter";
  case RunStatus::Aborted:
    return "Aborted";
  }
  return "Unknown";
}

/// Gauss-Newton direction d = -Dh^* (Dh Dh^*)^{-1} h(X).
template <ConstraintMap H>
Matrix gauss_newton_direction(const H &constraint, const Matrix &X) {
  return -constraint.adjoint(X, constraint.gram_solve(X, constraint.value(X)));
}

/// G_h = P_{T_M(X)}(d(X)).
template <InnerManifold M, ConstraintMap H>
Matrix feasibility_direction(const M &manifold, const H &constraint,
                             const typename M::Point &x, const Matrix &dense) {
  return manifold.tangent_project(x, gauss_newton_direction(constraint, dense));
}

template <InnerManifold M, ConstraintMap H>
Matrix feasibility_direction(const M &manifold, const H &constraint,
                             const typename M::Point &x) {
  return feasibility_direction(manifold, constraint, x, manifold.dense(x));
}

/// Orthogonal projection of xi onto S(X) = ker(Dh_X) ∩ T_M(X).
///
/// With Phi = P_{T_M} ∘ Dh^*, the projection is
///   xi_bar - Phi (Dh ∘ Phi)^+ Dh(xi_bar),  xi_bar = P_{T_M}(xi).
/// Phi is materialized column by column, so this path costs q ambient-sized
/// matrices and is refused above kMaxDenseConstraintDim.
template <InnerManifold M, ConstraintMap H>
Matrix tangent_intersection_project(const M &manifold, const H &constraint,
                                    const typename M::Point &x,
                                    const Matrix &dense, const Matrix &xi) {
  const Index q = constraint.output_dim();
  if (q > kMaxDenseConstraintDim) {
    throw Error(ErrorKind::DimensionGuard,
                "tangent_intersection_project: q = " + std::to_string(q));
  }
  const Matrix xi_bar = manifold.tangent_project(x, xi);

  std::vector<Matrix> phi;
  phi.reserve(static_cast<size_t>(q));
  Matrix B(q, q);
  for (Index i = 0; i < q; ++i) {
    phi.push_back(
        manifold.tangent_project(x, constraint.adjoint(dense, Vector::Unit(q, i))));
    B.col(i) = constraint.diff(dense, phi.back());
  }
  B = 0.5 * (B + B.transpose()).eval();

  const Vector lam = pinv_apply(B, constraint.diff(dense, xi_bar));
  Matrix out = xi_bar;
  for (Index i = 0; i < q; ++i) {
    out -= lam(i) * phi[static_cast<size_t>(i)];
  }
  return out;
}

template <InnerManifold M, ConstraintMap H>
Matrix tangent_intersection_project(const M &manifold, const H &constraint,
                                    const typename M::Point &x,
                                    const Matrix &xi) {
  return tangent_intersection_project(manifold, constraint, x,
                                      manifold.dense(x), xi);
}

/// Routes through the problem's specialized projector when it has one.
template <class P>
Matrix project_onto_intersection(const P &problem,
                                 const typename P::Point &x,
                                 const Matrix &dense, const Matrix &xi) {
  if (problem.fast_projector) {
    return problem.fast_projector(x, dense, xi);
  }
  return tangent_intersection_project(problem.manifold, problem.constraint, x,
                                      dense, xi);
}

/// G_f = P_{S(X)}(-grad f(X)).
template <class P>
Matrix optimality_direction(const P &problem, const typename P::Point &x,
                            const Matrix &dense) {
  return project_onto_intersection(problem, x, dense,
                                   -problem.gradient(dense));
}

template <class P>
Matrix optimality_direction(const P &problem, const typename P::Point &x) {
  return optimality_direction(problem, x, problem.manifold.dense(x));
}

template <class Point> struct StepResult {
  Point next;
  double gh_norm = 0.0;
  double gf_norm = 0.0;
};

/// X_+ = R_X(alpha G_h + beta G_f).
template <class P>
StepResult<typename P::Point> gotd_step(const P &problem,
                                        const typename P::Point &x,
                                        double alpha, double beta) {
  const Matrix dense = problem.manifold.dense(x);
  const Matrix gh =
      feasibility_direction(problem.manifold, problem.constraint, x, dense);
  const Matrix gf = optimality_direction(problem, x, dense);
  return {problem.manifold.retract(x, alpha * gh + beta * gf), gh.norm(),
          gf.norm()};
}

template <class Point> struct RunResult {
  Point final_point;
  std::vector<TraceRecord> trace;
  RunStatus status = RunStatus::MaxIter;
  int iterations = 0; // retraction steps taken
  std::string abort_reason;
};

/// Runs the iteration from x0 until max(||G_h||, ||G_f||) <= tol or
/// config.max_iter steps. Iterates k with k % trace_every == 0 are traced,
/// as is the last one. Library errors raised mid-run abort with the iterate
/// index in abort_reason.
template <class P>
RunResult<typename P::Point>
gotd_run(const P &problem, const typename P::Point &x0, const GotdConfig &config,
         const std::function<double(const Matrix &)> &extra_metric = {}) {
  if (!(config.alpha > 0.0) || !(config.beta > 0.0) || !(config.tol >= 0.0) ||
      config.max_iter < 0 || config.trace_every <= 0) {
    throw Error(ErrorKind::UsageError, "gotd_run: invalid configuration");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunResult<typename P::Point> result{x0, {}, RunStatus::MaxIter, 0, {}};
  for (int k = 0;; ++k) {
    Matrix dense;
    Matrix gh;
    Matrix gf;
    try {
      dense = problem.manifold.dense(result.final_point);
      gh = feasibility_direction(problem.manifold, problem.constraint,
                                 result.final_point, dense);
      gf = optimality_direction(problem, result.final_point, dense);
    } catch (const Error &e) {
      result.status = RunStatus::Aborted;
      result.abort_reason = "iteration " + std::to_string(k) + ": " + e.what();
      return result;
    }
    const double gh_norm = gh.norm();
    const double gf_norm = gf.norm();
    const bool converged = std::max(gh_norm, gf_norm) <= config.tol;
    const bool exhausted = k >= config.max_iter;

    if (converged || exhausted || k % config.trace_every == 0) {
      TraceRecord rec;
      rec.iter = k;
      rec.f_value = problem.objective(dense);
      rec.feas_norm = problem.constraint.value(dense).norm();
      rec.gh_norm = gh_norm;
      rec.gf_norm = gf_norm;
      if (extra_metric) {
        rec.extra = extra_metric(dense);
      }
      rec.wall_seconds =
          std::chrono::duration<double>(Clock::now() - start).count();
      result.trace.push_back(rec);
    }
    if (converged) {
      result.status = RunStatus::Converged;
      return result;
    }
    if (exhausted) {
      result.status = RunStatus::MaxIter;
      return result;
    }
    try {
      result.final_point = problem.manifold.retract(
          result.final_point, config.alpha * gh + config.beta * gf);
    } catch (const Error &e) {
      result.status = RunStatus::Aborted;
      result.abort_reason = "iteration " + std::to_string(k) + ": " + e.what();
      return result;
    }
    result.iterations = k + 1;
  }
}

/// f + lambda * ||h|| / c_h, with ||h|| / c_h standing in for dist(X, H).
inline double lyapunov_value(double f_value, double feas_norm, double lambda,
                             double c_h = 1.0) {
  return f_value + lambda * (feas_norm / c_h);
}

/// Tracks f + lambda * feasibility along a trace.
struct LyapunovMonitor {
  double lambda = 1.0;
  double c_h = 1.0;
  std::vector<double> values;

  explicit LyapunovMonitor(double lambda_, double c_h_ = 1.0)
      : lambda(lambda_), c_h(c_h_) {
    if (!(lambda_ > 0.0)) {
      throw Error(ErrorKind::UsageError, "LyapunovMonitor: lambda must be > 0");
    }
  }

  void push(const TraceRecord &rec) {
    values.push_back(lyapunov_value(rec.f_value, rec.feas_norm, lambda, c_h));
  }

  /// True if values[k+1] <= slack * values[k] for every traced k >= from.
  bool non_increasing_after(const std::vector<TraceRecord> &trace, int from,
                            double slack) const {
    for (size_t k = 0; k + 1 < values.size(); ++k) {
      if (trace[k].iter >= from && values[k + 1] > slack * values[k]) {
        return false;
      }
    }
    return true;
  }
};

/// Smallest lambda in {2^0, ..., 2^max_exponent} making the Lyapunov sequence
/// non-increasing (up to `slack`) from iteration `from` on.
inline std::optional<double>
smallest_monotone_lambda(const std::vector<TraceRecord> &trace, int from,
                         double slack, int max_exponent, double c_h = 1.0) {
  for (int e = 0; e <= max_exponent; ++e) {
    LyapunovMonitor monitor(std::ldexp(1.0, e), c_h);
    for (const TraceRecord &rec : trace) {
      monitor.push(rec);
    }
    if (monitor.non_increasing_after(trace, from, slack)) {
      return monitor.lambda;
    }
  }
  return std::nullopt;
}

} // namespace gotd
