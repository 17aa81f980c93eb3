#include "svarkit/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"
#include "svarkit/rng.hpp"

namespace svarkit {

double consistency_factor(double trim, Index d) {
  if (trim <= 0.0) return 1.0;
  const double q = chi2_quantile(1.0 - trim, static_cast<double>(d));
  return (1.0 - trim) / chi2_cdf(q, static_cast<double>(d + 2));
}

SubsetFit subset_fit(const Matrix& x, const Matrix& y, const std::vector<Index>& rows) {
  const Index m = static_cast<Index>(rows.size());
  Matrix xs(m, x.cols());
  Matrix ys(m, y.cols());
  for (Index i = 0; i < m; ++i) {
    xs.row(i) = x.row(rows[i]);
    ys.row(i) = y.row(rows[i]);
  }
  const OlsFit f = ols(xs, ys);
  SubsetFit out;
  out.coef = f.coef;
  out.scatter = f.residuals.transpose() * f.residuals / static_cast<double>(m);
  out.det = out.scatter.determinant();
  return out;
}

Vector residual_distances(const Matrix& x, const Matrix& y, const Matrix& coef,
                          const Matrix& scatter) {
  const Matrix r = y - x * coef;
  Eigen::LLT<Matrix> llt(scatter);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::DegenerateSubset, "subset scatter is singular");
  const Matrix z = llt.matrixL().solve(r.transpose());
  return z.colwise().squaredNorm().transpose();
}

std::vector<Index> smallest_rows(const Vector& dist, Index h) {
  std::vector<Index> idx(dist.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](Index a, Index b) {
    return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + (h - 1), idx.end(), less);
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<Index> concentration_step(const Matrix& x, const Matrix& y, const SubsetFit& fit,
                                      Index h) {
  return smallest_rows(residual_distances(x, y, fit.coef, fit.scatter), h);
}

namespace {

struct Candidate {
  std::vector<Index> rows;
  SubsetFit fit;
  bool ok = false;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.ok != b.ok) return a.ok;
  if (a.fit.det != b.fit.det) return a.fit.det < b.fit.det;
  return a.rows < b.rows;
}

// Elemental start: k random rows give an exact coefficient fit; the scatter
// comes from the h rows with the smallest Euclidean residuals under it.
Candidate random_start(const Matrix& x, const Matrix& y, Index h, int csteps,
                       std::uint64_t seed, int start) {
  Stream rng(seed, static_cast<std::uint64_t>(start));
  const Index n = x.rows();
  const Index k = x.cols();
  Candidate c;
  try {
    std::vector<Index> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (Index i = 0; i < k; ++i) {
      const Index j = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    std::vector<Index> elem(pool.begin(), pool.begin() + k);
    Matrix xe(k, k);
    Matrix ye(k, y.cols());
    for (Index i = 0; i < k; ++i) {
      xe.row(i) = x.row(elem[i]);
      ye.row(i) = y.row(elem[i]);
    }
    Eigen::FullPivLU<Matrix> lu(xe);
    if (!lu.isInvertible()) return c;
    const Matrix coef = lu.solve(ye);
    const Vector euclid = (y - x * coef).rowwise().squaredNorm();
    c.rows = smallest_rows(euclid, h);
    c.fit = subset_fit(x, y, c.rows);
    for (int s = 0; s < csteps; ++s) {
      c.rows = concentration_step(x, y, c.fit, h);
      c.fit = subset_fit(x, y, c.rows);
    }
    c.ok = std::isfinite(c.fit.det) && c.fit.det > 0.0;
  } catch (const Error&) {
    c.ok = false;
  }
  return c;
}

void iterate_to_convergence(const Matrix& x, const Matrix& y, Index h, const MltsSearch& cfg,
                            Candidate& c) {
  for (int s = 0; s < cfg.max_csteps && c.ok; ++s) {
    std::vector<Index> rows = concentration_step(x, y, c.fit, h);
    if (rows == c.rows) break;
    SubsetFit f = subset_fit(x, y, rows);
    const double change = (c.fit.det - f.det) / std::max(std::abs(c.fit.det), 1e-300);
    c.rows = std::move(rows);
    c.fit = std::move(f);
    if (change < cfg.det_tol) break;
  }
}

RobustVarModel assemble(const Matrix& x, const Matrix& y, int p, bool intercept, Index d,
                        double alpha_trim, Index h, const Candidate& best) {
  RobustVarModel rm;
  rm.h = h;
  rm.alpha_trim = alpha_trim;
  rm.c_factor = consistency_factor(alpha_trim, d);
  rm.subset = best.rows;
  rm.objective = best.fit.det;
  rm.design = x;
  rm.target = y;
  VarModel& m = rm.model;
  m.p = p;
  m.d = d;
  m.nobs_effective = x.rows();
  Index row = 0;
  if (intercept) m.intercept = best.fit.coef.row(row++).transpose();
  for (int j = 0; j < p; ++j) {
    m.coeffs.push_back(best.fit.coef.block(row, 0, d, d).transpose());
    row += d;
  }
  m.residuals = y - x * best.fit.coef;
  m.sigma_u = rm.c_factor * best.fit.scatter;
  const Matrix xs = x;
  m.gamma = xs.transpose() * xs / static_cast<double>(x.rows());
  rm.distances = residual_distances(x, y, best.fit.coef, m.sigma_u);
  std::vector<char> in(x.rows(), 0);
  for (Index r : rm.subset) in[r] = 1;
  for (Index r = 0; r < x.rows(); ++r)
    if (!in[r]) rm.flagged_outliers.push_back(r);
  return rm;
}

template <bool Parallel>
RobustVarModel fit_mlts_impl(const Matrix& y_all, int p, double alpha_trim, const MltsSearch& cfg,
                             bool intercept, std::optional<Index> first) {
  require(alpha_trim >= 0.0 && alpha_trim <= 0.5, ErrorKind::DomainError,
          "trimming proportion must lie in [0, 0.5]");
  require(p >= 0, ErrorKind::InvalidOrder, "lag order must be >= 0");
  const Index d = y_all.cols();
  const Index start = first.value_or(p);
  const Index n = y_all.rows() - start;
  const Index h = static_cast<Index>(std::ceil((1.0 - alpha_trim) * static_cast<double>(n) - 1e-9));
  const Index k = d * p + (intercept ? 1 : 0);
  if (!(h > d * p + d + 1) || k == 0)
    fail(ErrorKind::InsufficientData, "subset size h = " + std::to_string(h) +
                                          " too small for the regression");
  const Matrix x = lag_design(y_all, p, intercept, start);
  const Matrix y = y_all.bottomRows(n);

  Candidate best;
  if (h >= n) {
    best.rows.resize(n);
    std::iota(best.rows.begin(), best.rows.end(), 0);
    best.fit = subset_fit(x, y, best.rows);
    best.ok = true;
  } else {
    std::vector<Candidate> cands(cfg.starts);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 4) num_threads(worker_count())
      for (int s = 0; s < cfg.starts; ++s)
        cands[s] = random_start(x, y, h, cfg.initial_csteps, cfg.seed, s);
    } else {
      for (int s = 0; s < cfg.starts; ++s)
        cands[s] = random_start(x, y, h, cfg.initial_csteps, cfg.seed, s);
    }
    std::sort(cands.begin(), cands.end(), candidate_less);
    // distinct subsets only
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const Candidate& a, const Candidate& b) { return a.rows == b.rows; }),
                cands.end());
    const int keep = std::min<int>(cfg.finalists, static_cast<int>(cands.size()));
    cands.resize(keep);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
      for (int i = 0; i < keep; ++i) iterate_to_convergence(x, y, h, cfg, cands[i]);
    } else {
      for (int i = 0; i < keep; ++i) iterate_to_convergence(x, y, h, cfg, cands[i]);
    }
    std::sort(cands.begin(), cands.end(), candidate_less);
    if (cands.empty() || !cands.front().ok)
      fail(ErrorKind::DegenerateSubset, "no random start produced a nonsingular subset scatter");
    best = std::move(cands.front());
  }
  if (!(best.fit.det > 0.0))
    fail(ErrorKind::DegenerateSubset, "best subset has a singular residual scatter");
  return assemble(x, y, p, intercept, d, alpha_trim, h, best);
}

}  // namespace

RobustVarModel fit_mlts(const Matrix& y, int p, double alpha_trim, const MltsSearch& cfg,
                        bool intercept, std::optional<Index> first) {
  return fit_mlts_impl<true>(y, p, alpha_trim, cfg, intercept, first);
}

RobustVarModel fit_mlts_serial(const Matrix& y, int p, double alpha_trim, const MltsSearch& cfg,
                               bool intercept, std::optional<Index> first) {
  return fit_mlts_impl<false>(y, p, alpha_trim, cfg, intercept, first);
}

RobustVarModel reweight_rmlts(const RobustVarModel& rm, double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorKind::DomainError, "delta must lie in (0,1)");
  const Index d = rm.model.d;
  const double q = chi2_quantile(1.0 - delta, static_cast<double>(d));
  std::vector<Index> keep;
  for (Index r = 0; r < rm.distances.size(); ++r)
    if (rm.distances(r) <= q) keep.push_back(r);
  if (static_cast<Index>(keep.size()) <= rm.design.cols() + d)
    fail(ErrorKind::DegenerateSubset, "too few rows survive reweighting");
  Candidate c;
  c.rows = keep;
  try {
    c.fit = subset_fit(rm.design, rm.target, keep);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularRegressors)
      fail(ErrorKind::DegenerateSubset, "reweighted subset is degenerate");
    throw;
  }
  if (!(c.fit.det > 0.0)) fail(ErrorKind::DegenerateSubset, "reweighted scatter is singular");
  c.ok = true;
  RobustVarModel out = assemble(rm.design, rm.target, rm.model.p, rm.model.has_intercept(), d,
                                delta, static_cast<Index>(keep.size()), c);
  return out;
}

IcTable robust_order_select(const Matrix& y, int pmax, double alpha_trim, double delta,
                            const MltsSearch& cfg, bool intercept) {
  require(pmax >= 0, ErrorKind::InvalidOrder, "pmax must be >= 0");
  IcTable table;
  const Index d = y.cols();
  const Index n = y.rows() - pmax;
  table.nobs = n;
  const double nn = static_cast<double>(n);
  const double cd = consistency_factor(delta, d);
  for (int p = 0; p <= pmax; ++p) {
    const RobustVarModel r = reweight_rmlts(fit_mlts(y, p, alpha_trim, cfg, intercept, pmax), delta);
    const double m = static_cast<double>(r.h);
    const double base = std::log(r.model.sigma_u.determinant()) +
                        (m - static_cast<double>(d)) * static_cast<double>(d) / (nn * cd);
    const double k = static_cast<double>(d * d * p);
    IcRow row;
    row.p = p;
    row.log_det = std::log(r.model.sigma_u.determinant());
    row.aic = base + 2.0 * k / nn;
    row.bic = base + std::log(nn) * k / nn;
    row.hqc = base + 2.0 * std::log(std::log(nn)) * k / nn;
    table.rows.push_back(row);
  }
  auto best = [&](double IcRow::*f) {
    int b = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
      if (table.rows[i].*f < table.rows[b].*f) b = static_cast<int>(i);
    return b;
  };
  table.best_aic = best(&IcRow::aic);
  table.best_bic = best(&IcRow::bic);
  table.best_hqc = best(&IcRow::hqc);
  return table;
}

}  // namespace svarkit
