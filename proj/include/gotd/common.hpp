#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gotd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Failure categories raised by the library. Every thrown gotd::Error carries
/// one of these so callers (and the iteration loop) can report what broke.
enum class ErrorKind {
  RankDeficient,
  IllConditioned,
  ShapeMismatch,
  NotTangent,
  DegenerateStep,
  DegenerateProjection,
  DimensionGuard,
  DomainViolation,
  InfeasibleSampling,
  NotConverged,
  UsageError,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::RankDeficient:
    return "RankDeficient";
  case ErrorKind::IllConditioned:
    return "IllConditioned";
  case ErrorKind::ShapeMismatch:
    return "ShapeMismatch";
  case ErrorKind::NotTangent:
    return "NotTangent";
  case ErrorKind::DegenerateStep:
    return "DegenerateStep";
  case ErrorKind::DegenerateProjection:
    return "DegenerateProjection";
  case ErrorKind::DimensionGuard:
    return "DimensionGuard";
  case ErrorKind::DomainViolation:
    return "DomainViolation";
  case ErrorKind::InfeasibleSampling:
    return "InfeasibleSampling";
  case ErrorKind::NotConverged:
    return "NotConverged";
  case ErrorKind::UsageError:
    return "UsageError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline void check_shape(const char *where, Index rows, Index cols,
                        Index expected_rows, Index expected_cols) {
  if (rows != expected_rows || cols != expected_cols) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(where) + ": got " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", expected " +
                    std::to_string(expected_rows) + "x" +
                    std::to_string(expected_cols));
  }
}

/// Frobenius inner product.
inline double inner(const Matrix &a, const Matrix &b) {
  return (a.array() * b.array()).sum();
}

} // namespace gotd
