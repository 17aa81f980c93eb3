#pragma once

#include <variant>

#include "svarkit/dynamics.hpp"

namespace svarkit {

/// Impulse regressor: either the contemporaneous value of all variables
/// (reduced-form LP) or an observed shock series aligned with the data rows.
using LpImpulse = std::variant<std::monostate, Vector>;

struct LpEstimate {
  int horizon = 0;
  int control_lags = 0;
  Index response = 0;
  /// Coefficients on the impulse regressors: 1 x d for the reduced form
  /// (on y_t), 1 x 1 for a shock series.
  Matrix beta;
  Matrix se;  // HAC standard errors, same shape as beta
  Index nobs = 0;
  Vector residuals;
  Matrix design;  // regressors used, for diagnostics
};

/// Regression of y_{response, t+h} on the impulse regressor at t, p lags of
/// all variables (t-1..t-p) and a constant. Standard errors are Newey-West
/// with Bartlett weights and bandwidth h.
LpEstimate fit_lp(const Matrix& y, int horizon, int control_lags, Index response,
                  const LpImpulse& impulse = {}, bool intercept = true);
LpEstimate fit_lp(const TimeSeriesDataset& ds, int horizon, int control_lags, Index response,
                  const LpImpulse& impulse = {}, bool intercept = true);

/// Responses of every variable to the shock series for h = 0..H (d x 1 per h).
ImpulseResponseSet lp_irf(const Matrix& y, int max_horizon, int control_lags,
                          const Vector& shock, bool intercept = true);
ImpulseResponseSet lp_irf(const TimeSeriesDataset& ds, int max_horizon, int control_lags,
                          const Vector& shock, bool intercept = true);

}  // namespace svarkit
