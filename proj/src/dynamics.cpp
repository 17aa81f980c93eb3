#include "svarkit/dynamics.hpp"

#include <cmath>

#include "svarkit/errors.hpp"

namespace svarkit {

ImpulseResponseSet irf(const StructuralModel& sm, int horizon) {
  require(horizon >= 0, ErrorKind::DomainError, "horizon must be >= 0");
  const auto phi = ma_coefficients(sm.base, horizon);
  ImpulseResponseSet out;
  out.theta.reserve(phi.size());
  for (const auto& p : phi) out.theta.push_back(p * sm.impact);
  return out;
}

FevdTable fevd(const StructuralModel& sm, int horizon) {
  require(horizon >= 1, ErrorKind::DomainError, "FEVD horizon must be >= 1");
  const auto resp = irf(sm, horizon - 1);
  const Index d = sm.base.d;
  FevdTable out;
  Matrix cum = Matrix::Zero(d, sm.impact.cols());
  for (int h = 1; h <= horizon; ++h) {
    cum += resp.theta[h - 1].array().square().matrix();
    Matrix share(d, cum.cols());
    for (Index j = 0; j < d; ++j) {
      const double total = cum.row(j).sum();
      if (!(total > 0.0))
        fail(ErrorKind::DegenerateVariance,
             "variable " + std::to_string(j) + " has zero forecast-error variance");
      share.row(j) = cum.row(j) / total;
    }
    out.share.push_back(std::move(share));
  }
  return out;
}

HistoricalDecomposition historical_decomposition(const StructuralModel& sm, const Matrix& y) {
  const VarModel& m = sm.base;
  const Index d = m.d;
  require(y.cols() == d, ErrorKind::ShapeError, "dataset width does not match the model");
  const Index n = y.rows() - m.p;
  require(n == m.residuals.rows(), ErrorKind::ShapeError,
          "dataset does not match the model's estimation sample");
  Eigen::FullPivLU<Matrix> lu(sm.impact);
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    fail(ErrorKind::SingularImpact, "impact matrix is singular");

  HistoricalDecomposition out;
  out.observed = y.bottomRows(n);
  out.shocks = lu.solve(m.residuals.transpose()).transpose();
  const auto theta = irf(sm, static_cast<int>(std::max<Index>(n - 1, 0))).theta;
  out.contribution.assign(d, Matrix::Zero(n, d));
  for (Index t = 0; t < n; ++t) {
    for (Index s = 0; s <= t; ++s) {
      const Matrix& th = theta[s];
      for (Index k = 0; k < d; ++k) {
        const double w = out.shocks(t - s, k);
        if (w != 0.0) out.contribution[k].row(t).noalias() += w * th.col(k).transpose();
      }
    }
  }
  out.remainder = out.observed;
  for (Index k = 0; k < d; ++k) out.remainder -= out.contribution[k];
  return out;
}

HistoricalDecomposition historical_decomposition(const StructuralModel& sm,
                                                 const TimeSeriesDataset& ds) {
  return historical_decomposition(sm, ds.values());
}

ConnectednessTable gfevd_connectedness(const VarModel& m, int horizon) {
  require(horizon >= 1, ErrorKind::DomainError, "connectedness horizon must be >= 1");
  const Index d = m.d;
  lower_cholesky(m.sigma_u, 1e-10);
  const auto phi = ma_coefficients(m, horizon - 1);
  const Matrix& s = m.sigma_u;
  Matrix num = Matrix::Zero(d, d);
  Vector den = Vector::Zero(d);
  for (const auto& th : phi) {
    const Matrix ts = th * s;
    num += ts.array().square().matrix();
    den += (ts * th.transpose()).diagonal();
  }
  ConnectednessTable out;
  out.horizon = horizon;
  out.raw.resize(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) out.raw(i, j) = num(i, j) / s(j, j) / den(i);
  out.normalized = out.raw.array().colwise() / out.raw.rowwise().sum().array();
  const Matrix off = out.normalized - Matrix(out.normalized.diagonal().asDiagonal());
  out.from = off.rowwise().sum();
  out.to = off.colwise().sum().transpose();
  out.net = out.to - out.from;
  out.total = off.sum() / static_cast<double>(d);
  return out;
}

}  // namespace svarkit
