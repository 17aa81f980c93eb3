#pragma once

#include <vector>

#include <Eigen/Dense>

namespace svarkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Multivariate least squares Y = X B + E.
struct OlsFit {
  Matrix coef;       // k x m
  Matrix residuals;  // n x m
  Matrix gram;       // X'X
};

/// Reciprocal condition number of a symmetric PSD matrix (min/max eigenvalue).
double rcond_spd(const Matrix& a);

/// Least squares through the normal equations; throws SingularRegressors when
/// rcond(X'X) < min_rcond.
OlsFit ols(const Matrix& x, const Matrix& y, double min_rcond = 1e-12);

/// VAR design for target rows [first, T): row t is [1, y_{t-1}', ..., y_{t-p}'].
Matrix lag_design(const Matrix& y, int p, bool intercept, Index first);

/// Lower Cholesky factor; throws NotPositiveDefinite unless
/// min eigenvalue > rel_tol * max eigenvalue.
Matrix lower_cholesky(const Matrix& sigma, double rel_tol = 1e-10);

/// Half-vectorization of the lower triangle, column-major.
Vector vech(const Matrix& a);

/// Orthonormal basis of the orthogonal complement of span(a) (d x (d - rank)).
/// Columns come from a full SVD; each column's first non-negligible entry is positive.
Matrix orthogonal_complement(const Matrix& a, double rel_tol = 1e-10);

double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);
double chi2_quantile(double p, double df);
double normal_quantile(double p);

/// Bartlett-kernel long-run variance of a scalar series around its mean.
double bartlett_lrv(const Vector& x, int bandwidth);

/// Empirical quantile with linear interpolation (type 7).
double quantile(std::vector<double> values, double prob);

}  // namespace svarkit
