#pragma once

#include <vector>

#include "svarkit/datamodel.hpp"

namespace svarkit {

struct IcRow {
  int p = 0;
  double log_det = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double hqc = 0.0;
};

struct IcTable {
  std::vector<IcRow> rows;  // p = 0..pmax
  int best_aic = 0;
  int best_bic = 0;
  int best_hqc = 0;
  Index nobs = 0;  // common estimation sample size
};

/// Information criteria on the common sample rows [pmax, T).
IcTable ic_table(const Matrix& y, int pmax, bool intercept);
IcTable ic_table(const TimeSeriesDataset& ds, int pmax, bool intercept);

struct WaldStep {
  int lag = 0;
  double statistic = 0.0;
  double critical = 0.0;
  bool significant = false;
};

struct SelectedLag {
  int p_hat = 0;
  std::vector<WaldStep> trace;  // in evaluation order, pmax downwards
};

/// Wald statistic for A_p = 0 in a VAR(p) fitted on rows [first, T).
double last_lag_wald(const Matrix& y, int p, bool intercept, Index first);

/// General-to-specific descent from pmax: stop at the first lag whose
/// last-coefficient Wald statistic exceeds the chi2_{d^2}(1 - alpha) quantile.
SelectedLag sequential_wald(const Matrix& y, int pmax, double alpha, bool intercept = true);
SelectedLag sequential_wald(const TimeSeriesDataset& ds, int pmax, double alpha,
                            bool intercept = true);

}  // namespace svarkit
