#include "svarkit/var.hpp"

#include <algorithm>
#include <set>

#include "svarkit/errors.hpp"

namespace svarkit {

Matrix VarModel::stacked_coeffs() const {
  Matrix a(d, d * p);
  for (int j = 0; j < p; ++j) a.block(0, j * d, d, d) = coeffs[j];
  return a;
}

VarModel make_var(std::vector<Matrix> coeffs, Matrix sigma_u, std::optional<Vector> intercept) {
  VarModel m;
  m.d = sigma_u.rows();
  m.p = static_cast<int>(coeffs.size());
  for (const auto& a : coeffs)
    require(a.rows() == m.d && a.cols() == m.d, ErrorKind::ShapeError,
            "coefficient matrices must be d x d");
  if (intercept)
    require(intercept->size() == m.d, ErrorKind::ShapeError, "intercept must have length d");
  m.coeffs = std::move(coeffs);
  m.sigma_u = std::move(sigma_u);
  m.intercept = std::move(intercept);
  return m;
}

VarModel fit_var(const Matrix& y, int p, bool intercept, std::optional<Index> first) {
  require(p >= 0, ErrorKind::InvalidOrder, "lag order must be non-negative");
  const Index t = y.rows();
  const Index d = y.cols();
  const Index start = first.value_or(p);
  require(start >= p, ErrorKind::InvalidOrder, "first target row must be >= p");
  const Index n = t - start;
  const Index k = d * p + (intercept ? 1 : 0);
  if (n <= k)
    fail(ErrorKind::InsufficientData, "VAR(" + std::to_string(p) + ") needs more than " +
                                          std::to_string(k) + " effective rows, have " +
                                          std::to_string(std::max<Index>(n, 0)));
  const Matrix x = lag_design(y, p, intercept, start);
  const Matrix target = y.bottomRows(n);

  VarModel m;
  m.p = p;
  m.d = d;
  m.nobs_effective = n;
  if (k == 0) {
    // p = 0 without intercept: nothing to estimate
    m.residuals = target;
  } else {
    OlsFit fit = ols(x, target);
    m.residuals = std::move(fit.residuals);
    m.gamma = fit.gram / static_cast<double>(n);
    Index row = 0;
    if (intercept) m.intercept = fit.coef.row(row++).transpose();
    for (int j = 0; j < p; ++j) {
      m.coeffs.push_back(fit.coef.block(row, 0, d, d).transpose());
      row += d;
    }
  }
  m.sigma_u = m.residuals.transpose() * m.residuals / static_cast<double>(n);
  return m;
}

VarModel fit_var(const TimeSeriesDataset& ds, int p, bool intercept) {
  return fit_var(ds.values(), p, intercept);
}

Matrix companion_matrix(std::span<const Matrix> coeffs) {
  const int p = static_cast<int>(coeffs.size());
  require(p >= 1, ErrorKind::InvalidOrder, "companion form needs p >= 1");
  const Index d = coeffs[0].rows();
  Matrix c = Matrix::Zero(d * p, d * p);
  for (int j = 0; j < p; ++j) c.block(0, j * d, d, d) = coeffs[j];
  if (p > 1) c.block(d, 0, d * (p - 1), d * (p - 1)).setIdentity();
  return c;
}

CompanionMatrix companion(const VarModel& m) {
  require(m.p >= 1, ErrorKind::InvalidOrder, "companion form needs p >= 1");
  CompanionMatrix out;
  out.matrix = companion_matrix(m.coeffs);
  Eigen::EigenSolver<Matrix> es(out.matrix, false);
  const auto& ev = es.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    out.eigenvalues.push_back(ev(i));
    out.spectral_radius = std::max(out.spectral_radius, std::abs(ev(i)));
  }
  return out;
}

StabilityReport check_stability(const VarModel& m, double tol) {
  CompanionMatrix c = companion(m);
  StabilityReport r;
  r.spectral_radius = c.spectral_radius;
  r.eigenvalues = std::move(c.eigenvalues);
  r.stable = r.spectral_radius <= 1.0 - tol;
  r.boundary = std::abs(r.spectral_radius - 1.0) < tol;
  return r;
}

std::vector<Matrix> ma_coefficients(const VarModel& m, int horizon) {
  require(horizon >= 0, ErrorKind::DomainError, "horizon must be >= 0");
  std::vector<Matrix> phi;
  phi.reserve(horizon + 1);
  phi.push_back(Matrix::Identity(m.d, m.d));
  for (int i = 1; i <= horizon; ++i) {
    Matrix acc = Matrix::Zero(m.d, m.d);
    for (int j = 1; j <= std::min(i, m.p); ++j) acc.noalias() += m.coeffs[j - 1] * phi[i - j];
    phi.push_back(std::move(acc));
  }
  return phi;
}

Matrix asymptotic_cov(const VarModel& m) {
  require(m.p >= 1, ErrorKind::InvalidOrder, "asymptotic covariance needs p >= 1");
  require(m.gamma.size() > 0, ErrorKind::ShapeError,
          "asymptotic covariance needs a fitted model");
  if (rcond_spd(m.gamma) < 1e-12)
    fail(ErrorKind::SingularRegressors, "regressor second-moment matrix is singular");
  const Matrix ginv_full = m.gamma.ldlt().solve(Matrix::Identity(m.gamma.rows(), m.gamma.cols()));
  const Index off = m.has_intercept() ? 1 : 0;
  const Index k = m.d * m.p;
  Matrix ginv = ginv_full.block(off, off, k, k);
  ginv = 0.5 * (ginv + ginv.transpose()).eval();
  const Matrix& s = m.sigma_u;
  Matrix out(k * m.d, k * m.d);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) out.block(i * m.d, j * m.d, m.d, m.d) = ginv(i, j) * s;
  return out;
}

Matrix forecast_iterated(const VarModel& m, const Matrix& last_obs, int h) {
  require(h >= 1, ErrorKind::DomainError, "forecast horizon must be >= 1");
  require(last_obs.rows() == m.p && last_obs.cols() == m.d, ErrorKind::ShapeError,
          "last_obs must be p x d");
  // history: oldest first, grows with forecasts
  Matrix path(m.p + h, m.d);
  path.topRows(m.p) = last_obs;
  for (int s = 0; s < h; ++s) {
    const Index t = m.p + s;
    Vector y = m.intercept ? *m.intercept : Vector::Zero(m.d);
    for (int j = 1; j <= m.p; ++j) y.noalias() += m.coeffs[j - 1] * path.row(t - j).transpose();
    path.row(t) = y.transpose();
  }
  return path.bottomRows(h);
}

TestResult make_chi2_result(double statistic, int df) {
  TestResult r;
  r.statistic = std::max(statistic, 0.0);
  r.df = df;
  r.p_value = df > 0 ? chi2_sf(r.statistic, df) : (r.statistic > 0 ? 0.0 : 1.0);
  for (double level : {0.01, 0.05, 0.10}) {
    if (r.p_value < level) {
      r.rejected_at = level;
      break;
    }
  }
  return r;
}

TestResult granger_wald(const VarModel& m, std::span<const int> cause,
                        std::span<const int> effect) {
  require(!cause.empty() && !effect.empty(), ErrorKind::EmptySelection,
          "cause and effect sets must be non-empty");
  require(m.p >= 1, ErrorKind::InvalidOrder, "Granger test needs p >= 1");
  std::set<int> cs(cause.begin(), cause.end());
  for (int e : effect)
    require(!cs.count(e), ErrorKind::DomainError, "cause and effect sets overlap");
  for (int v : cs) require(v >= 0 && v < m.d, ErrorKind::ShapeError, "cause index out of range");
  for (int v : effect)
    require(v >= 0 && v < m.d, ErrorKind::ShapeError, "effect index out of range");

  const Matrix v = asymptotic_cov(m) / static_cast<double>(m.nobs_effective);
  std::vector<Index> idx;
  for (int lag = 1; lag <= m.p; ++lag)
    for (int c : cause)
      for (int e : effect) idx.push_back(coeff_vec_index(m.d, lag, e, c));
  const Index q = static_cast<Index>(idx.size());
  Vector theta(q);
  Matrix vs(q, q);
  for (Index a = 0; a < q; ++a) {
    const Index lag = idx[a] / (m.d * m.d);
    const Index col = (idx[a] / m.d) % m.d;
    const Index row = idx[a] % m.d;
    theta(a) = m.coeffs[lag](row, col);
    for (Index b = 0; b < q; ++b) vs(a, b) = v(idx[a], idx[b]);
  }
  if (rcond_spd(vs) < 1e-14)
    fail(ErrorKind::SingularRegressors, "Wald covariance block is singular");
  const double w = theta.dot(vs.ldlt().solve(theta));
  return make_chi2_result(w, static_cast<int>(q));
}

}  // namespace svarkit
