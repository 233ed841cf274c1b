#pragma once

#include "gotd/common.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gotd {

/// Deterministic, splittable random source. The engine is std::mt19937_64,
/// whose output sequence is fixed by the standard; uniform and normal variates
/// are derived here (not via <random> distributions, which are
/// implementation-defined) so that a seed reproduces the same data everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream),
        engine_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

  /// Independent child generator identified by `stream`.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(seed_ + 0x9E3779B97F4A7C15ULL * (stream_ + 1)), stream);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, n), by rejection on the top bits.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) {
      v = next_u64();
    }
    return v % n;
  }

  /// rows x cols matrix of N(0, 1) entries, filled column by column.
  Matrix normal_matrix(Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        out(i, j) = normal();
      }
    }
    return out;
  }

private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace gotd
