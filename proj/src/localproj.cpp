#include "svarkit/localproj.hpp"

#include <cmath>

#include "svarkit/errors.hpp"

namespace svarkit {

namespace {

Matrix hac_cov(const Matrix& x, const Vector& e, const Matrix& gram_inv, int bandwidth) {
  const Index n = x.rows();
  const Matrix xe = x.array().colwise() * e.array();
  Matrix meat = xe.transpose() * xe;
  for (int l = 1; l <= bandwidth && l < n; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (bandwidth + 1.0);
    const Matrix g = xe.bottomRows(n - l).transpose() * xe.topRows(n - l);
    meat += w * (g + g.transpose());
  }
  return gram_inv * meat * gram_inv;
}

}  // namespace

LpEstimate fit_lp(const Matrix& y, int horizon, int control_lags, Index response,
                  const LpImpulse& impulse, bool intercept) {
  const Index t_total = y.rows();
  const Index d = y.cols();
  const int p = control_lags;
  require(horizon >= 0, ErrorKind::DomainError, "horizon must be >= 0");
  require(p >= 0, ErrorKind::InvalidOrder, "control lags must be >= 0");
  require(response >= 0 && response < d, ErrorKind::ShapeError, "response index out of range");
  const bool shock_mode = std::holds_alternative<Vector>(impulse);
  if (shock_mode)
    require(std::get<Vector>(impulse).size() == t_total, ErrorKind::ShapeError,
            "shock series must have one value per data row");
  if (t_total <= horizon + p + d * p + 2)
    fail(ErrorKind::InsufficientData, "series too short for local projection at horizon " +
                                          std::to_string(horizon));

  // target rows t = p .. T-1-h
  const Index first = p;
  const Index n = t_total - horizon - first;
  const Index n_imp = shock_mode ? 1 : d;
  const Index k = (intercept ? 1 : 0) + n_imp + d * p;
  require(n > k, ErrorKind::InsufficientData, "not enough rows for the projection");
  Matrix x(n, k);
  Vector target(n);
  for (Index r = 0; r < n; ++r) {
    const Index t = first + r;
    Index c = 0;
    if (intercept) x(r, c++) = 1.0;
    if (shock_mode) {
      x(r, c++) = std::get<Vector>(impulse)(t);
    } else {
      x.block(r, c, 1, d) = y.row(t);
      c += d;
    }
    for (int j = 1; j <= p; ++j) {
      x.block(r, c, 1, d) = y.row(t - j);
      c += d;
    }
    target(r) = y(t + horizon, response);
  }
  const OlsFit fit = ols(x, target);
  const Matrix gram_inv = fit.gram.ldlt().solve(Matrix::Identity(k, k));
  const Vector e = fit.residuals.col(0);
  const Matrix cov = hac_cov(x, e, gram_inv, horizon);

  LpEstimate out;
  out.horizon = horizon;
  out.control_lags = p;
  out.response = response;
  out.nobs = n;
  const Index off = intercept ? 1 : 0;
  out.beta = fit.coef.block(off, 0, n_imp, 1).transpose();
  out.se.resize(1, n_imp);
  for (Index i = 0; i < n_imp; ++i) out.se(0, i) = std::sqrt(std::max(0.0, cov(off + i, off + i)));
  out.residuals = e;
  out.design = std::move(x);
  return out;
}

LpEstimate fit_lp(const TimeSeriesDataset& ds, int horizon, int control_lags, Index response,
                  const LpImpulse& impulse, bool intercept) {
  return fit_lp(ds.values(), horizon, control_lags, response, impulse, intercept);
}

ImpulseResponseSet lp_irf(const Matrix& y, int max_horizon, int control_lags,
                          const Vector& shock, bool intercept) {
  require(max_horizon >= 0, ErrorKind::DomainError, "horizon must be >= 0");
  const Index d = y.cols();
  ImpulseResponseSet out;
  out.theta.assign(max_horizon + 1, Matrix::Zero(d, 1));
  // horizons are independent regressions
  for (int h = 0; h <= max_horizon; ++h)
    for (Index i = 0; i < d; ++i)
      out.theta[h](i, 0) = fit_lp(y, h, control_lags, i, shock, intercept).beta(0, 0);
  return out;
}

ImpulseResponseSet lp_irf(const TimeSeriesDataset& ds, int max_horizon, int control_lags,
                          const Vector& shock, bool intercept) {
  return lp_irf(ds.values(), max_horizon, control_lags, shock, intercept);
}

}  // namespace svarkit
