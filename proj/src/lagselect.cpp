#include "svarkit/lagselect.hpp"

#include <cmath>

#include "svarkit/errors.hpp"
#include "svarkit/var.hpp"

namespace svarkit {

namespace {

int argmin(const std::vector<IcRow>& rows, double IcRow::*field) {
  int best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].*field < rows[best].*field) best = static_cast<int>(i);
  return rows[best].p;
}

}  // namespace

IcTable ic_table(const Matrix& y, int pmax, bool intercept) {
  require(pmax >= 0, ErrorKind::InvalidOrder, "pmax must be >= 0");
  const Index d = y.cols();
  const Index n = y.rows() - pmax;
  if (n <= d * pmax + (intercept ? 1 : 0) + d)
    fail(ErrorKind::InsufficientData, "not enough observations for pmax = " +
                                          std::to_string(pmax));
  IcTable table;
  table.nobs = n;
  const double nn = static_cast<double>(n);
  for (int p = 0; p <= pmax; ++p) {
    const VarModel m = fit_var(y, p, intercept, pmax);
    const double ld = std::log(m.sigma_u.determinant());
    const double k = static_cast<double>(d * d * p);
    IcRow row;
    row.p = p;
    row.log_det = ld;
    row.aic = ld + 2.0 * k / nn;
    row.bic = ld + std::log(nn) * k / nn;
    row.hqc = ld + 2.0 * std::log(std::log(nn)) * k / nn;
    table.rows.push_back(row);
  }
  table.best_aic = argmin(table.rows, &IcRow::aic);
  table.best_bic = argmin(table.rows, &IcRow::bic);
  table.best_hqc = argmin(table.rows, &IcRow::hqc);
  return table;
}

IcTable ic_table(const TimeSeriesDataset& ds, int pmax, bool intercept) {
  return ic_table(ds.values(), pmax, intercept);
}

double last_lag_wald(const Matrix& y, int p, bool intercept, Index first) {
  const VarModel m = fit_var(y, p, intercept, first);
  const Index d = m.d;
  const Matrix& a = m.coeffs[p - 1];
  // Var(vec A_p) = (Gamma^{-1})_{pp} (x) Sigma / n
  const Index off = (intercept ? 1 : 0) + (p - 1) * d;
  const Matrix ginv = m.gamma.ldlt().solve(Matrix::Identity(m.gamma.rows(), m.gamma.cols()));
  const Matrix block = ginv.block(off, off, d, d);
  Matrix cov(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) cov.block(i * d, j * d, d, d) = block(i, j) * m.sigma_u;
  cov /= static_cast<double>(m.nobs_effective);
  const Eigen::Map<const Vector> theta(a.data(), d * d);
  return std::max(0.0, theta.dot(cov.ldlt().solve(theta)));
}

SelectedLag sequential_wald(const Matrix& y, int pmax, double alpha, bool intercept) {
  require(pmax >= 1, ErrorKind::InvalidOrder, "pmax must be >= 1");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::DomainError, "alpha must lie in (0,1)");
  const Index d = y.cols();
  if (y.rows() < pmax * d + 10)
    fail(ErrorKind::InsufficientData, "series too short for sequential Wald selection");
  const double crit = chi2_quantile(1.0 - alpha, static_cast<double>(d * d));
  SelectedLag out;
  for (int j = pmax; j >= 1; --j) {
    WaldStep step;
    step.lag = j;
    step.statistic = last_lag_wald(y, j, intercept, pmax);
    step.critical = crit;
    step.significant = step.statistic > crit;
    out.trace.push_back(step);
    if (step.significant) {
      out.p_hat = j;
      return out;
    }
  }
  out.p_hat = 0;
  return out;
}

SelectedLag sequential_wald(const TimeSeriesDataset& ds, int pmax, double alpha,
                            bool intercept) {
  return sequential_wald(ds.values(), pmax, alpha, intercept);
}

}  // namespace svarkit
