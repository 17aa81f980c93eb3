#include "svarkit/bootstrap.hpp"

#include <cmath>

#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"

namespace svarkit {

int default_block_length(Index n) {
  return std::max(1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-12)));
}

Matrix mbb_centering(const Matrix& residuals, int block_length) {
  const Index n = residuals.rows();
  const Index l = block_length;
  require(l >= 1 && l <= n, ErrorKind::ShapeError, "block length must lie in [1, n]");
  const Index blocks = n - l + 1;
  Matrix c(l, residuals.cols());
  for (Index s = 0; s < l; ++s)
    c.row(s) = residuals.middleRows(s, blocks).colwise().sum() / static_cast<double>(blocks);
  return c;
}

Matrix mbb_resample(const Matrix& residuals, const Matrix& centering, Stream& rng) {
  const Index n = residuals.rows();
  const Index l = centering.rows();
  const Index n_blocks = (n + l - 1) / l;
  const std::uint64_t starts = static_cast<std::uint64_t>(n - l + 1);
  Matrix out(n, residuals.cols());
  Index pos = 0;
  for (Index b = 0; b < n_blocks; ++b) {
    const Index i = static_cast<Index>(rng.index(starts));
    const Index take = std::min(l, n - pos);
    out.middleRows(pos, take) = residuals.middleRows(i, take) - centering.topRows(take);
    pos += take;
  }
  return out;
}

Matrix mbb_resample(const Matrix& residuals, int block_length, Stream& rng) {
  return mbb_resample(residuals, mbb_centering(residuals, block_length), rng);
}

VarModel bootstrap_replicate(const VarModel& m, const Matrix& centering, Stream& rng) {
  const Matrix u = mbb_resample(m.residuals, centering, rng);
  const Index n = u.rows();
  const Index d = m.d;
  Matrix y = Matrix::Zero(n + m.p, d);
  for (Index t = 0; t < n; ++t) {
    Vector v = u.row(t).transpose();
    if (m.intercept) v += *m.intercept;
    for (int j = 1; j <= m.p; ++j) v.noalias() += m.coeffs[j - 1] * y.row(m.p + t - j).transpose();
    y.row(m.p + t) = v.transpose();
  }
  return fit_var(y, m.p, m.has_intercept());
}

namespace {

Vector beta_vec(const VarModel& m) {
  const Matrix a = m.stacked_coeffs();
  return Eigen::Map<const Vector>(a.data(), a.size());
}

BootstrapDraws prepare(const VarModel& m, const BootstrapConfig& cfg) {
  require(m.p >= 1, ErrorKind::InvalidOrder, "bootstrap needs a fitted model with p >= 1");
  require(m.residuals.rows() > 0, ErrorKind::ShapeError, "bootstrap needs model residuals");
  require(cfg.replicates >= 1, ErrorKind::DomainError, "replicates must be >= 1");
  require(cfg.level > 0.0 && cfg.level < 1.0, ErrorKind::DomainError, "level must lie in (0,1)");
  BootstrapDraws out;
  out.config = cfg;
  out.block_length = cfg.block_length > 0 ? cfg.block_length
                                          : default_block_length(m.residuals.rows());
  require(out.block_length <= m.residuals.rows(), ErrorKind::ShapeError,
          "block length exceeds the effective sample");
  out.beta_hat = beta_vec(m);
  out.sigma_hat = vech(m.sigma_u);
  out.beta.assign(cfg.replicates, Vector());
  out.sigma.assign(cfg.replicates, Vector());
  out.failed.assign(cfg.replicates, 0);
  return out;
}

void run_replicate(const VarModel& m, const Matrix& centering, BootstrapDraws& out, int r) {
  Stream rng(out.config.seed, static_cast<std::uint64_t>(r));
  try {
    const VarModel b = bootstrap_replicate(m, centering, rng);
    out.beta[r] = beta_vec(b);
    out.sigma[r] = vech(b.sigma_u);
  } catch (const Error&) {
    out.failed[r] = 1;
  }
}

void finish(BootstrapDraws& out) {
  out.failures = 0;
  for (char f : out.failed) out.failures += f;
  if (out.failures * 100 > out.config.replicates)
    fail(ErrorKind::ReplicateFailure,
         std::to_string(out.failures) + " of " + std::to_string(out.config.replicates) +
             " bootstrap replicates failed");
}

}  // namespace

BootstrapDraws mbb_distribution(const VarModel& m, const BootstrapConfig& cfg) {
  BootstrapDraws out = prepare(m, cfg);
  const Matrix centering = mbb_centering(m.residuals, out.block_length);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
  for (int r = 0; r < cfg.replicates; ++r) run_replicate(m, centering, out, r);
  finish(out);
  return out;
}

BootstrapDraws mbb_distribution_serial(const VarModel& m, const BootstrapConfig& cfg) {
  BootstrapDraws out = prepare(m, cfg);
  const Matrix centering = mbb_centering(m.residuals, out.block_length);
  for (int r = 0; r < cfg.replicates; ++r) run_replicate(m, centering, out, r);
  finish(out);
  return out;
}

StructuralModel identify(const VarModel& m, const SchemeSpec& spec) {
  switch (spec.scheme) {
    case Scheme::Recursive: return identify_recursive(m, spec.order);
    case Scheme::LongRun: return identify_longrun(m);
    default:
      fail(ErrorKind::DomainError, "bootstrap bands support recursive and longrun schemes only");
  }
}

std::pair<double, double> hall_interval(double point, const std::vector<double>& draws,
                                        double level) {
  const double a = 1.0 - level;
  const double q_lo = quantile(draws, a / 2.0);
  const double q_hi = quantile(draws, 1.0 - a / 2.0);
  return {2.0 * point - q_hi, 2.0 * point - q_lo};
}

ImpulseResponseSet irf_ci(const VarModel& m, const SchemeSpec& spec, int horizon,
                          const BootstrapConfig& cfg) {
  require(spec.scheme == Scheme::Recursive || spec.scheme == Scheme::LongRun,
          ErrorKind::DomainError, "bootstrap bands support recursive and longrun schemes only");
  BootstrapDraws meta = prepare(m, cfg);
  const Matrix centering = mbb_centering(m.residuals, meta.block_length);
  ImpulseResponseSet point = irf(identify(m, spec), horizon);

  std::vector<std::vector<Matrix>> reps(cfg.replicates);
  std::vector<char> failed(cfg.replicates, 0);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
  for (int r = 0; r < cfg.replicates; ++r) {
    Stream rng(cfg.seed, static_cast<std::uint64_t>(r));
    try {
      const VarModel b = bootstrap_replicate(m, centering, rng);
      reps[r] = irf(identify(b, spec), horizon).theta;
    } catch (const Error&) {
      failed[r] = 1;
    }
  }
  int n_failed = 0;
  for (char f : failed) n_failed += f;
  if (n_failed * 100 > cfg.replicates)
    fail(ErrorKind::ReplicateFailure, std::to_string(n_failed) + " of " +
                                          std::to_string(cfg.replicates) +
                                          " bootstrap replicates failed");

  const Index d = m.d;
  std::vector<Matrix> lower(horizon + 1, Matrix(d, d));
  std::vector<Matrix> upper(horizon + 1, Matrix(d, d));
  std::vector<double> cell;
  cell.reserve(cfg.replicates);
  for (int h = 0; h <= horizon; ++h) {
    for (Index i = 0; i < d; ++i) {
      for (Index k = 0; k < d; ++k) {
        cell.clear();
        for (int r = 0; r < cfg.replicates; ++r)
          if (!failed[r]) cell.push_back(reps[r][h](i, k));
        const auto [lo, hi] = hall_interval(point.theta[h](i, k), cell, cfg.level);
        lower[h](i, k) = lo;
        upper[h](i, k) = hi;
      }
    }
  }
  point.lower = std::move(lower);
  point.upper = std::move(upper);
  return point;
}

}  // namespace svarkit
