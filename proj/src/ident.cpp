#include "svarkit/ident.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "svarkit/errors.hpp"

namespace svarkit {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Recursive: return "recursive";
    case Scheme::LongRun: return "longrun";
    case Scheme::ProxyColumn: return "proxy-column";
    case Scheme::SignSet: return "sign-set";
  }
  return "unknown";
}

namespace {

std::vector<std::string> default_shock_names(Index d) {
  std::vector<std::string> names;
  for (Index k = 0; k < d; ++k) names.push_back("shock" + std::to_string(k + 1));
  return names;
}

}  // namespace

StructuralModel identify_recursive(const VarModel& m, const std::vector<int>& order_in) {
  const Index d = m.d;
  std::vector<int> order = order_in;
  if (order.empty()) {
    order.resize(d);
    std::iota(order.begin(), order.end(), 0);
  }
  require(static_cast<Index>(order.size()) == d, ErrorKind::ShapeError,
          "ordering must list every variable once");
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (Index k = 0; k < d; ++k)
      require(sorted[k] == k, ErrorKind::ShapeError, "ordering must be a permutation");
  }
  Matrix permuted(d, d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) permuted(a, b) = m.sigma_u(order[a], order[b]);
  const Matrix l = lower_cholesky(permuted, 1e-10);

  StructuralModel sm;
  sm.base = m;
  sm.scheme = Scheme::Recursive;
  sm.impact = Matrix::Zero(d, d);
  for (Index a = 0; a < d; ++a) sm.impact.row(order[a]) = l.row(a);
  sm.shock_names = default_shock_names(d);
  return sm;
}

StructuralModel identify_longrun(const VarModel& m) {
  const Index d = m.d;
  Matrix a1 = Matrix::Identity(d, d);
  for (const auto& a : m.coeffs) a1 -= a;
  Eigen::JacobiSVD<Matrix> svd(a1);
  const auto& sv = svd.singularValues();
  if (!(sv(d - 1) > 1e-10 * sv(0)))
    fail(ErrorKind::NearUnitRoot,
         "I - sum A_j is ill-conditioned; long-run restrictions are unreliable near unit roots");
  const Matrix c1 = a1.partialPivLu().inverse();
  const Matrix lr = c1 * m.sigma_u * c1.transpose();
  const Matrix theta1 = lower_cholesky(lr, 1e-10);

  StructuralModel sm;
  sm.base = m;
  sm.scheme = Scheme::LongRun;
  sm.impact = a1 * theta1;
  sm.longrun_impact = theta1;
  sm.shock_names = default_shock_names(d);
  return sm;
}

StructuralModel identify_proxy(const VarModel& m, const Vector& z, Index k,
                               const ProxyOptions& opts) {
  const Index n = m.residuals.rows();
  require(n > 0, ErrorKind::ShapeError, "proxy identification needs a fitted model");
  require(z.size() == n, ErrorKind::ShapeError,
          "instrument length " + std::to_string(z.size()) + " does not match " +
              std::to_string(n) + " residual rows");
  require(z.allFinite(), ErrorKind::DomainError, "instrument contains non-finite values");
  require(k >= 0 && k < m.d, ErrorKind::ShapeError, "target shock index out of range");

  ProxyRecord rec;
  rec.target = k;
  rec.raw_cov = m.residuals.transpose() * z / static_cast<double>(n);

  // first stage: u_k on [1, z]
  Matrix x(n, 2);
  x.col(0).setOnes();
  x.col(1) = z;
  double f = 0.0;
  try {
    const OlsFit fs = ols(x, m.residuals.col(k));
    const double s2 = fs.residuals.squaredNorm() / static_cast<double>(n - 2);
    const Matrix ginv = fs.gram.inverse();
    const double se2 = s2 * ginv(1, 1);
    f = se2 > 0 ? fs.coef(1, 0) * fs.coef(1, 0) / se2 : std::numeric_limits<double>::infinity();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularRegressors) throw;
    f = 0.0;
  }
  rec.first_stage_f = f;
  if (f < opts.min_f && !opts.allow_weak)
    fail(ErrorKind::WeakInstrument,
         "first-stage F = " + std::to_string(f) + " below " + std::to_string(opts.min_f));

  const Matrix sinv = m.sigma_u.ldlt().solve(Matrix::Identity(m.d, m.d));
  const double q = rec.raw_cov.dot(sinv * rec.raw_cov);
  require(q > 0.0, ErrorKind::WeakInstrument, "instrument is orthogonal to every residual");
  rec.scale = std::sqrt(q);

  StructuralModel sm;
  sm.base = m;
  sm.scheme = Scheme::ProxyColumn;
  sm.impact = Matrix::Zero(m.d, m.d);
  sm.impact.col(k) = rec.raw_cov / rec.scale;
  sm.shock_names = default_shock_names(m.d);
  sm.proxy = std::move(rec);
  return sm;
}

Matrix vech_weight(const Matrix& residuals) {
  const Index n = residuals.rows();
  const Index d = residuals.cols();
  const Index q = d * (d + 1) / 2;
  Matrix w(n, q);
  for (Index t = 0; t < n; ++t) {
    const Vector u = residuals.row(t).transpose();
    w.row(t) = vech(u * u.transpose()).transpose();
  }
  const Vector mean = w.colwise().mean().transpose();
  const Matrix c = w.rowwise() - mean.transpose();
  const Matrix cov = c.transpose() * c / static_cast<double>(n);
  if (rcond_spd(cov) < 1e-14)
    fail(ErrorKind::SingularRegressors, "covariance of vech(u u') is singular");
  return cov.ldlt().solve(Matrix::Identity(q, q));
}

namespace {

int overid_df(Index d, int n_restrictions) {
  return static_cast<int>(d * (d + 1) / 2 - (d * d - n_restrictions));
}

double j_statistic(const VarModel& m, const Matrix& w, const Matrix& b) {
  const Vector diff = vech(m.sigma_u) - vech(b * b.transpose());
  return static_cast<double>(m.nobs_effective) * diff.dot(w * diff);
}

}  // namespace

TestResult j_test(const VarModel& m, const Matrix& impact_candidate, int n_restrictions) {
  require(impact_candidate.rows() == m.d && impact_candidate.cols() == m.d,
          ErrorKind::ShapeError, "impact candidate must be d x d");
  require(impact_candidate.allFinite(), ErrorKind::DomainError,
          "impact candidate has non-finite entries");
  const int df = overid_df(m.d, n_restrictions);
  if (df < 0)
    fail(ErrorKind::NegativeDf, "candidate is under-identified (df = " + std::to_string(df) + ")");
  const Matrix w = vech_weight(m.residuals);
  const double j = j_statistic(m, w, impact_candidate);
  if (df == 0) {
    TestResult r;
    r.statistic = j;
    r.df = 0;
    r.p_value = 1.0;
    return r;
  }
  return make_chi2_result(j, df);
}

Matrix gmm_restricted_impact(const VarModel& m, const Eigen::MatrixX<bool>& zero_mask,
                             int max_iter) {
  const Index d = m.d;
  require(zero_mask.rows() == d && zero_mask.cols() == d, ErrorKind::ShapeError,
          "zero mask must be d x d");
  std::vector<std::pair<Index, Index>> free;
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      if (!zero_mask(i, j)) free.emplace_back(i, j);
  const int n_zero = static_cast<int>(d * d - static_cast<Index>(free.size()));
  if (overid_df(d, n_zero) < 0)
    fail(ErrorKind::NegativeDf, "zero pattern leaves the impact under-identified");

  const Matrix w = vech_weight(m.residuals);
  const Matrix u = Eigen::LLT<Matrix>(w).matrixU();
  const Vector s = vech(m.sigma_u);

  Matrix b = lower_cholesky(m.sigma_u, 1e-10);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      if (zero_mask(i, j)) b(i, j) = 0.0;

  auto residual = [&](const Matrix& bb) -> Vector { return u * (s - vech(bb * bb.transpose())); };
  Vector r = residual(b);
  double obj = r.squaredNorm();
  double mu = 1e-3;
  const Index q = s.size();
  const Index nf = static_cast<Index>(free.size());
  for (int it = 0; it < max_iter; ++it) {
    Matrix jac(q, nf);
    for (Index c = 0; c < nf; ++c) {
      Matrix e = Matrix::Zero(d, d);
      e(free[c].first, free[c].second) = 1.0;
      jac.col(c) = -u * vech(e * b.transpose() + b * e.transpose());
    }
    const Matrix jtj = jac.transpose() * jac;
    const Vector g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Matrix lhs = jtj;
      lhs.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
      const Vector step = lhs.ldlt().solve(-g);
      Matrix cand = b;
      for (Index c = 0; c < nf; ++c) cand(free[c].first, free[c].second) += step(c);
      const Vector rc = residual(cand);
      const double oc = rc.squaredNorm();
      if (oc < obj) {
        const double rel = (obj - oc) / std::max(obj, 1e-300);
        b = cand;
        r = rc;
        obj = oc;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        if (rel < 1e-14) it = max_iter;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  for (Index j = 0; j < d; ++j)
    if (b(j, j) < 0) b.col(j) *= -1.0;
  return b;
}

// ---- sign-restriction bounds -------------------------------------------------

namespace {

struct BoundCandidate {
  double value;
  unsigned mask;
  int sign;        // +1 or -1
  bool null_ray;   // candidate from a one-dimensional feasible subspace
};

Matrix restriction_matrix(const SignRestrictionSet& r, unsigned mask) {
  const Index mz = r.z.cols();
  Index cols = mz;
  for (Index j = 0; j < r.s.cols(); ++j)
    if (mask & (1u << j)) ++cols;
  Matrix out(r.z.rows() > 0 ? r.z.rows() : r.s.rows(), cols);
  Index c = 0;
  for (Index j = 0; j < mz; ++j) out.col(c++) = r.z.col(j);
  for (Index j = 0; j < r.s.cols(); ++j)
    if (mask & (1u << j)) out.col(c++) = r.s.col(j);
  return out;
}

// Feasible subspace basis for restriction matrix R (d x m); d x 0 if trivial.
Matrix feasible_basis(const Matrix& rmat, Index d) {
  if (rmat.cols() == 0) return Matrix::Identity(d, d);
  return orthogonal_complement(rmat);
}

// Point of the ellipsoid attaining sign * max over the subspace, or the
// ray itself for one-dimensional subspaces (null_ray).
std::optional<Vector> candidate_point(const Vector& c, const Matrix& sigma, const Matrix& basis,
                                      int sign, bool null_ray) {
  if (basis.cols() == 0) return std::nullopt;
  const Matrix sinv = sigma.ldlt().solve(Matrix::Identity(sigma.rows(), sigma.cols()));
  if (null_ray) {
    if (basis.cols() != 1) return std::nullopt;
    const Vector v = basis.col(0);
    return Vector(sign * v / std::sqrt(v.dot(sinv * v)));
  }
  const Matrix g = basis.transpose() * sinv * basis;
  const Matrix mm = basis * g.ldlt().solve(basis.transpose());
  const double q = c.dot(mm * c);
  if (!(q > 1e-20 * std::max(1.0, c.squaredNorm() * sigma.norm()))) return std::nullopt;
  return Vector(sign * (mm * c) / std::sqrt(q));
}

bool feasible(const Vector& x, const SignRestrictionSet& r, double tol) {
  for (Index j = 0; j < r.s.cols(); ++j)
    if (r.s.col(j).dot(x) < -tol * r.s.col(j).norm() * x.norm()) return false;
  for (Index j = 0; j < r.z.cols(); ++j)
    if (std::abs(r.z.col(j).dot(x)) > 1e-8 * r.z.col(j).norm() * x.norm()) return false;
  return true;
}

Vector response_weights(std::span<const Matrix> coeffs, Index d, int horizon, Index response) {
  VarModel tmp;
  tmp.d = d;
  tmp.p = static_cast<int>(coeffs.size());
  tmp.coeffs.assign(coeffs.begin(), coeffs.end());
  const auto phi = ma_coefficients(tmp, horizon);
  return phi[horizon].row(response).transpose();
}

std::vector<BoundCandidate> enumerate_candidates(const Vector& c, const Matrix& sigma,
                                                 const SignRestrictionSet& r) {
  const Index d = sigma.rows();
  const Index ms = r.s.cols();
  std::vector<BoundCandidate> out;
  for (unsigned mask = 0; mask < (1u << ms); ++mask) {
    const Matrix basis = feasible_basis(restriction_matrix(r, mask), d);
    if (basis.cols() == 0) continue;
    for (bool ray : {false, true}) {
      if (ray && basis.cols() != 1) continue;
      for (int sign : {+1, -1}) {
        const auto x = candidate_point(c, sigma, basis, sign, ray);
        if (!x || !feasible(*x, r, 1e-10)) continue;
        out.push_back({c.dot(*x), mask, sign, ray});
      }
    }
  }
  return out;
}

double candidate_value(std::span<const Matrix> coeffs, const Matrix& sigma,
                       const SignRestrictionSet& r, int horizon, Index response,
                       const BoundCandidate& cand) {
  const Index d = sigma.rows();
  const Vector c = response_weights(coeffs, d, horizon, response);
  const Matrix basis = feasible_basis(restriction_matrix(r, cand.mask), d);
  const auto x = candidate_point(c, sigma, basis, cand.sign, cand.null_ray);
  return x ? c.dot(*x) : 0.0;
}

// Lexicographic order of the active subset, as a bit list from restriction 0.
bool mask_less(unsigned a, unsigned b, Index ms) {
  for (Index j = 0; j < ms; ++j) {
    const bool ba = a & (1u << j);
    const bool bb = b & (1u << j);
    if (ba != bb) return ba && !bb;
  }
  return false;
}

}  // namespace

IrfBoundInterval sign_restriction_bounds(const VarModel& m, const SignRestrictionSet& r,
                                         int horizon, Index response, double level) {
  const Index d = m.d;
  require(horizon >= 0, ErrorKind::DomainError, "horizon must be >= 0");
  require(response >= 0 && response < d, ErrorKind::ShapeError, "response index out of range");
  require(r.z.cols() == 0 || r.z.rows() == d, ErrorKind::ShapeError, "Z must have d rows");
  require(r.s.cols() == 0 || r.s.rows() == d, ErrorKind::ShapeError, "S must have d rows");
  require(r.z.allFinite() && r.s.allFinite(), ErrorKind::DomainError,
          "restriction columns must be finite");
  require(r.z.cols() <= d - 1, ErrorKind::InfeasibleRestrictions,
          "at most d-1 equality restrictions");
  if (r.s.cols() > 20)
    fail(ErrorKind::TooManyRestrictions, "more than 20 sign restrictions");
  lower_cholesky(m.sigma_u, 1e-10);  // SPD check

  const Vector c = response_weights(m.coeffs, d, horizon, response);
  const auto cands = enumerate_candidates(c, m.sigma_u, r);
  if (cands.empty())
    fail(ErrorKind::InfeasibleRestrictions, "no impact column satisfies the restrictions");

  const Index ms = r.s.cols();
  auto better_max = [&](const BoundCandidate& a, const BoundCandidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return mask_less(a.mask, b.mask, ms);
  };
  auto better_min = [&](const BoundCandidate& a, const BoundCandidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return mask_less(a.mask, b.mask, ms);
  };
  const BoundCandidate hi = *std::min_element(cands.begin(), cands.end(), better_max);
  const BoundCandidate lo = *std::min_element(cands.begin(), cands.end(), better_min);

  IrfBoundInterval out;
  out.horizon = horizon;
  out.response = response;
  out.shock = r.target_shock;
  out.upper = hi.value;
  out.lower = lo.value;
  out.level = level;
  out.ci_lower = out.lower;
  out.ci_upper = out.upper;
  if (m.gamma.size() == 0 || m.residuals.rows() == 0 || m.p == 0) return out;

  // Delta method. Parameter vector: vec([A_1..A_p]) then vech(Sigma).
  const Index na = d * d * m.p;
  const Index ns = d * (d + 1) / 2;
  Matrix omega = Matrix::Zero(na + ns, na + ns);
  omega.topLeftCorner(na, na) = asymptotic_cov(m);
  omega.bottomRightCorner(ns, ns) =
      vech_weight(m.residuals).ldlt().solve(Matrix::Identity(ns, ns));

  auto gradient = [&](const BoundCandidate& cand) {
    Vector g(na + ns);
    std::vector<Matrix> coeffs = m.coeffs;
    Matrix sigma = m.sigma_u;
    for (Index a = 0; a < na; ++a) {
      const Index lag = a / (d * d);
      const Index col = (a / d) % d;
      const Index row = a % d;
      double& ref = coeffs[lag](row, col);
      const double base = ref;
      const double h = 1e-6 * std::max(1.0, std::abs(base));
      ref = base + h;
      const double fp = candidate_value(coeffs, sigma, r, horizon, response, cand);
      ref = base - h;
      const double fm = candidate_value(coeffs, sigma, r, horizon, response, cand);
      ref = base;
      g(a) = (fp - fm) / (2 * h);
    }
    Index k = 0;
    for (Index j = 0; j < d; ++j) {
      for (Index i = j; i < d; ++i, ++k) {
        const double base = sigma(i, j);
        const double h = 1e-6 * std::max(1.0, std::abs(base));
        sigma(i, j) = sigma(j, i) = base + h;
        const double fp = candidate_value(coeffs, sigma, r, horizon, response, cand);
        sigma(i, j) = sigma(j, i) = base - h;
        const double fm = candidate_value(coeffs, sigma, r, horizon, response, cand);
        sigma(i, j) = sigma(j, i) = base;
        g(na + k) = (fp - fm) / (2 * h);
      }
    }
    return g;
  };
  auto sigma_over = [&](double target) {
    double best = 0.0;
    const double tol = 1e-10 * std::max(1.0, std::abs(target));
    for (const auto& cand : cands) {
      if (std::abs(cand.value - target) > tol) continue;
      const Vector g = gradient(cand);
      best = std::max(best, std::sqrt(std::max(0.0, g.dot(omega * g))));
    }
    return best;
  };
  out.sigma_upper = sigma_over(out.upper);
  out.sigma_lower = sigma_over(out.lower);
  out.sigma_hat = std::max(out.sigma_upper, out.sigma_lower);
  const double zq = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double rn = std::sqrt(static_cast<double>(m.nobs_effective));
  out.ci_lower = out.lower - zq * out.sigma_lower / rn;
  out.ci_upper = out.upper + zq * out.sigma_upper / rn;
  out.has_ci = true;
  return out;
}

}  // namespace svarkit
