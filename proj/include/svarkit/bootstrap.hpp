#pragma once

#include <cstdint>
#include <vector>

#include "svarkit/dynamics.hpp"
#include "svarkit/rng.hpp"

namespace svarkit {

struct BootstrapConfig {
  int replicates = 999;
  int block_length = 0;  // 0 selects ceil(n^{1/3})
  std::uint64_t seed = 0;
  double level = 0.9;
};

int default_block_length(Index n);

/// Position-specific means (1/(n-l+1)) sum_{r=0}^{n-l} u_{s+r}, s = 1..l (l x d).
Matrix mbb_centering(const Matrix& residuals, int block_length);

/// One moving-block resample of length n: ceil(n/l) blocks with uniform
/// start in {0..n-l}, laid end to end, truncated to n rows and centered
/// position-wise.
Matrix mbb_resample(const Matrix& residuals, int block_length, Stream& rng);

/// Same draw with a precomputed centering table.
Matrix mbb_resample(const Matrix& residuals, const Matrix& centering, Stream& rng);

struct BootstrapDraws {
  BootstrapConfig config;
  int block_length = 0;
  Vector beta_hat;               // vec([A_1..A_p]) of the original fit
  Vector sigma_hat;              // vech(Sigma_u) of the original fit
  std::vector<Vector> beta;      // per replicate
  std::vector<Vector> sigma;     // per replicate
  std::vector<char> failed;      // per replicate
  int failures = 0;
};

/// Regenerates y* from zero pre-sample values and refits VAR(p). Replicate r
/// draws from Stream(seed, r).
VarModel bootstrap_replicate(const VarModel& m, const Matrix& centering, Stream& rng);

/// Residual-based moving block bootstrap of (beta, vech Sigma). Replicates run
/// on the OpenMP worker pool; the result does not depend on the thread count.
BootstrapDraws mbb_distribution(const VarModel& m, const BootstrapConfig& cfg);
/// Single-threaded reference of mbb_distribution.
BootstrapDraws mbb_distribution_serial(const VarModel& m, const BootstrapConfig& cfg);

struct SchemeSpec {
  Scheme scheme = Scheme::Recursive;
  std::vector<int> order;  // recursive only
};

StructuralModel identify(const VarModel& m, const SchemeSpec& spec);

/// Hall percentile interval [2 x - q_{1-a/2}, 2 x - q_{a/2}], a = 1 - level.
std::pair<double, double> hall_interval(double point, const std::vector<double>& draws,
                                        double level);

/// Point IRF with Hall percentile bands from re-identified bootstrap replicates.
ImpulseResponseSet irf_ci(const VarModel& m, const SchemeSpec& spec, int horizon,
                          const BootstrapConfig& cfg);

}  // namespace svarkit
