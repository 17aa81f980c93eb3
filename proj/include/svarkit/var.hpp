#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "svarkit/datamodel.hpp"
#include "svarkit/numeric.hpp"

namespace svarkit {

/// Reduced-form VAR(p): y_t = nu + A_1 y_{t-1} + ... + A_p y_{t-p} + u_t.
struct VarModel {
  int p = 0;
  Index d = 0;
  std::optional<Vector> intercept;
  std::vector<Matrix> coeffs;  // A_1..A_p, each d x d
  Matrix residuals;            // n x d, n = nobs_effective
  Matrix sigma_u;              // residuals' residuals / n
  Index nobs_effective = 0;
  /// X'X / n of the stacked regressor [1, y_{t-1}', ..., y_{t-p}'] (intercept
  /// row/column first when present). Empty for hand-built models.
  Matrix gamma;

  bool has_intercept() const { return intercept.has_value(); }
  /// [A_1 ... A_p] as a d x dp matrix.
  Matrix stacked_coeffs() const;
};

/// Model from known parameters (simulation, tests). Residual fields are empty.
VarModel make_var(std::vector<Matrix> coeffs, Matrix sigma_u,
                  std::optional<Vector> intercept = std::nullopt);

/// Equation-by-equation least squares on target rows [first, T); first
/// defaults to p. Sigma_u uses divisor T - first.
VarModel fit_var(const Matrix& y, int p, bool intercept, std::optional<Index> first = {});
VarModel fit_var(const TimeSeriesDataset& ds, int p, bool intercept);

struct CompanionMatrix {
  Matrix matrix;  // dp x dp
  std::vector<std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
};

Matrix companion_matrix(std::span<const Matrix> coeffs);
CompanionMatrix companion(const VarModel& m);

struct StabilityReport {
  bool stable = false;
  bool boundary = false;
  double spectral_radius = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

StabilityReport check_stability(const VarModel& m, double tol = 1e-8);

/// Phi_0..Phi_H with Phi_0 = I and Phi_i = sum_{j<=min(i,p)} A_j Phi_{i-j}.
std::vector<Matrix> ma_coefficients(const VarModel& m, int horizon);

/// Gamma^{-1} (x) Sigma_u for vec([A_1 ... A_p]), size d^2 p. With an
/// intercept the lag block of the full inverse is used.
Matrix asymptotic_cov(const VarModel& m);

/// h-step iterated forecast from the last p observations (oldest first).
Matrix forecast_iterated(const VarModel& m, const Matrix& last_obs, int h);

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::optional<double> rejected_at;  // smallest of {0.01, 0.05, 0.10} rejected
};

TestResult make_chi2_result(double statistic, int df);

/// Wald test that all lag coefficients from `cause` into `effect` equations vanish.
TestResult granger_wald(const VarModel& m, std::span<const int> cause,
                        std::span<const int> effect);

/// Position of A_j(row, col) in vec([A_1 ... A_p]).
inline Index coeff_vec_index(Index d, int lag, Index row, Index col) {
  return ((lag - 1) * d + col) * d + row;
}

}  // namespace svarkit
