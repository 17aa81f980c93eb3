#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "svarkit/critvals.hpp"
#include "svarkit/var.hpp"

namespace svarkit {

enum class CusumVariant { Endpoint, MaxDeviation };

struct CusumResult {
  CusumVariant variant = CusumVariant::Endpoint;
  double statistic = 0.0;
  /// Endpoint: k maximizing |Z_k| (observations in the first regime).
  /// Max-deviation: the pair (s, t) of partial-sum indices spanning the range.
  Index max_location = 0;
  std::optional<std::pair<Index, Index>> interval;
  double alpha_hat = 0.0;  // sqrt of the long-run variance
  double p_value = 1.0;
  std::map<double, double> critical_values;  // level -> value
  std::map<double, bool> reject;
  Vector process;  // Z_0..Z_n
};

/// Partial-sum test on x_t = v'(y_t y_t')w after demeaning y.
CusumResult cusum_covariance_test(const Matrix& y, const Vector& v, const Vector& w,
                                  CusumVariant variant,
                                  const BridgeTable& table = bridge_table());

struct BssOptions {
  int max_iter = 10000;
  double tol = 1e-6;  // relative objective change
};

struct BssFit {
  Index block = 0;
  std::vector<Index> block_starts;  // time index of each block's first target row
  std::vector<Matrix> levels;       // per block, (dp) x d regression coefficients
  std::vector<Matrix> jumps;        // levels[i] - levels[i-1], jumps[0] = levels[0]
  std::vector<Index> candidates;    // block_starts[i], i >= 1, with a nonzero jump
  std::vector<double> candidate_norms;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Fused-penalty segmentation of a no-intercept VAR(p) on blocks of b target
/// rows: (1/n)||Y - Z theta||^2 + l1 sum_i ||theta_i||_1 + l2 sum_i ||sum_{j<=i} theta_j||_1.
BssFit bss_detect(const Matrix& y, int p, Index block, double lambda1, double lambda2,
                  const BssOptions& opt = {});

/// Smallest lambda1 (padded by 1%) at which the optimal jumps all vanish, by
/// bisection on the optimality condition of the pooled fit.
double bss_lambda_max(const Matrix& y, int p, Index block, double lambda2_ratio = 0.0);

/// 1-D total variation denoising, argmin 0.5||x - b||^2 + mu sum |b_i - b_{i-1}|.
std::vector<double> tv_denoise(const std::vector<double>& x, double mu);
/// Same with an extra mu |b_0| term (jump from an implicit zero before the chain).
std::vector<double> tv_denoise_anchored(const std::vector<double>& x, double mu);

struct LicResult {
  std::vector<Index> breaks;
  double lic = 0.0;
  double scale = 1.0;  // residual variance used to standardize SSE
  bool exhaustive = true;
};

/// Localized information criterion screening. SSE is computed over the union
/// of [c - a_n, c + a_n) windows, split at the retained breaks, divided by
/// `scale` (default: trace of the full-sample residual covariance / d).
LicResult lic_screen(const Matrix& y, const std::vector<Index>& candidates, int p, Index a_n,
                     double omega, std::optional<double> scale = {});

struct BreakConfig {
  Index block = 0;       // 0: ceil(sqrt(n))
  int grid = 10;
  double grid_span = 1e-3;     // smallest lambda1 / largest
  double lambda2_ratio = 0.0;  // lambda2 = ratio * lambda1
  Index a_n = 0;               // 0: block length
  double omega = -1.0;         // < 0: d^2 p log n
  bool demean = true;
  BssOptions solver;
};

struct GridPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t n_candidates = 0;
  std::vector<Index> breaks;
  double score = 0.0;
  bool converged = false;
};

struct BreakReport {
  Index block = 0;
  Index a_n = 0;
  double omega = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<Index> candidates;
  std::vector<double> candidate_norms;
  std::vector<Index> final_breaks;
  double score = 0.0;
  bool converged = false;
  std::vector<GridPoint> grid;
  std::vector<VarModel> segments;
  std::vector<std::pair<Index, Index>> segment_rows;  // [start, end) time indices
};

BreakReport detect_breaks(const Matrix& y, int p, const BreakConfig& cfg = {});
BreakReport detect_breaks_serial(const Matrix& y, int p, const BreakConfig& cfg = {});

}  // namespace svarkit
