#pragma once

#include <cstdint>
#include <vector>

#include "svarkit/lagselect.hpp"
#include "svarkit/var.hpp"

namespace svarkit {

struct MltsSearch {
  int starts = 500;
  int initial_csteps = 2;
  int finalists = 10;
  int max_csteps = 200;
  double det_tol = 1e-12;
  std::uint64_t seed = 0;
};

struct RobustVarModel {
  VarModel model;  // coefficients and consistency-corrected scatter
  Index h = 0;
  double alpha_trim = 0;
  double c_factor = 1;
  std::vector<Index> subset;   // retained effective-sample rows, ascending
  Vector distances;            // squared Mahalanobis residual distances, all rows
  std::vector<Index> flagged_outliers;
  double objective = 0;        // det of the uncorrected subset scatter
  Matrix design;               // regressors of the effective sample
  Matrix target;               // responses of the effective sample
};

/// (1 - a) / F_{chi2_{d+2}}(chi2_{d, 1-a}); equals 1 at a = 0.
double consistency_factor(double trim, Index d);

/// Least-squares fit and scatter (divisor |rows|) on a row subset.
struct SubsetFit {
  Matrix coef;
  Matrix scatter;
  double det = 0;
};
SubsetFit subset_fit(const Matrix& x, const Matrix& y, const std::vector<Index>& rows);

/// Squared Mahalanobis distances of residuals under (coef, scatter).
Vector residual_distances(const Matrix& x, const Matrix& y, const Matrix& coef,
                          const Matrix& scatter);

/// The h rows with the smallest distances (ties by index), ascending.
std::vector<Index> smallest_rows(const Vector& dist, Index h);

/// Concentration step: refit on the h rows closest under the current fit.
std::vector<Index> concentration_step(const Matrix& x, const Matrix& y, const SubsetFit& fit,
                                      Index h);

RobustVarModel fit_mlts(const Matrix& y, int p, double alpha_trim, const MltsSearch& cfg,
                        bool intercept = true, std::optional<Index> first = {});
/// Single-threaded reference of the random-start search.
RobustVarModel fit_mlts_serial(const Matrix& y, int p, double alpha_trim, const MltsSearch& cfg,
                               bool intercept = true, std::optional<Index> first = {});

RobustVarModel reweight_rmlts(const RobustVarModel& rm, double delta = 0.01);

/// Information criteria with the RMLTS scatter and the adjusted likelihood
/// term (m(k) - d) d / (n c_delta); common sample rows [pmax, T).
IcTable robust_order_select(const Matrix& y, int pmax, double alpha_trim, double delta,
                            const MltsSearch& cfg, bool intercept = true);

}  // namespace svarkit
