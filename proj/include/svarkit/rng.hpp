#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace svarkit {

/// Deterministic random stream keyed by (seed, stream id).
///
/// Every stochastic routine takes its randomness from a Stream derived from
/// the user seed and a stream index (replicate number, random start, path),
/// so results do not depend on the order in which streams are consumed or on
/// the number of worker threads. Variates are produced with explicit formulas
/// on top of the 64-bit Mersenne twister so that draws are identical across
/// standard library implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();
  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t index(std::uint64_t n);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// Child stream; children with distinct ids are independent.
  Stream split(std::uint64_t child_id) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace svarkit
