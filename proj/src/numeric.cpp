#include "svarkit/numeric.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "svarkit/errors.hpp"

namespace svarkit {

double rcond_spd(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = es.eigenvalues().minCoeff();
  if (!(hi > 0.0)) return 0.0;
  return std::max(lo, 0.0) / hi;
}

OlsFit ols(const Matrix& x, const Matrix& y, double min_rcond) {
  require(x.rows() == y.rows(), ErrorKind::ShapeError, "ols: row mismatch");
  require(x.rows() >= x.cols(), ErrorKind::InsufficientData,
          "ols: fewer rows than regressors");
  OlsFit fit;
  fit.gram = x.transpose() * x;
  if (rcond_spd(fit.gram) < min_rcond)
    fail(ErrorKind::SingularRegressors, "regressor Gram matrix is numerically singular");
  Eigen::LLT<Matrix> llt(fit.gram);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::SingularRegressors, "regressor Gram matrix is not positive definite");
  fit.coef = llt.solve(x.transpose() * y);
  fit.residuals = y - x * fit.coef;
  return fit;
}

Matrix lag_design(const Matrix& y, int p, bool intercept, Index first) {
  const Index t_total = y.rows();
  const Index d = y.cols();
  const Index n = t_total - first;
  const Index k = (intercept ? 1 : 0) + d * p;
  Matrix x(n, k);
  for (Index r = 0; r < n; ++r) {
    const Index t = first + r;
    Index c = 0;
    if (intercept) x(r, c++) = 1.0;
    for (int j = 1; j <= p; ++j) {
      x.block(r, c, 1, d) = y.row(t - j);
      c += d;
    }
  }
  return x;
}

Matrix lower_cholesky(const Matrix& sigma, double rel_tol) {
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = es.eigenvalues().minCoeff();
  if (!(hi > 0.0) || !(lo > rel_tol * hi))
    fail(ErrorKind::NotPositiveDefinite, "covariance matrix is not positive definite");
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::NotPositiveDefinite, "Cholesky factorization failed");
  return llt.matrixL();
}

Vector vech(const Matrix& a) {
  const Index d = a.rows();
  Vector v(d * (d + 1) / 2);
  Index k = 0;
  for (Index j = 0; j < d; ++j)
    for (Index i = j; i < d; ++i) v(k++) = a(i, j);
  return v;
}

Matrix orthogonal_complement(const Matrix& a, double rel_tol) {
  const Index d = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * std::max(smax, 1.0)) ++rank;
  Matrix perp = svd.matrixU().rightCols(d - rank);
  for (Index c = 0; c < perp.cols(); ++c) {
    for (Index r = 0; r < d; ++r) {
      if (std::abs(perp(r, c)) > 1e-12) {
        if (perp(r, c) < 0) perp.col(c) *= -1.0;
        break;
      }
    }
  }
  return perp;
}

double chi2_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(boost::math::chi_squared(df), x);
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

double chi2_quantile(double p, double df) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

double bartlett_lrv(const Vector& x, int bandwidth) {
  const Index n = x.size();
  const Vector c = x.array() - x.mean();
  double lrv = c.squaredNorm() / static_cast<double>(n);
  for (int l = 1; l <= bandwidth && l < n; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (bandwidth + 1.0);
    const double g = c.head(n - l).dot(c.tail(n - l)) / static_cast<double>(n);
    lrv += 2.0 * w * g;
  }
  return lrv;
}

double quantile(std::vector<double> values, double prob) {
  require(!values.empty(), ErrorKind::ShapeError, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace svarkit
