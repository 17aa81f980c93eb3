#pragma once

#include <cmath>
#include <vector>

#include "svarkit/numeric.hpp"
#include "svarkit/rng.hpp"
#include "svarkit/simulate.hpp"
#include "svarkit/var.hpp"

namespace testing {

using svarkit::Index;
using svarkit::Matrix;
using svarkit::Stream;
using svarkit::Vector;

inline Matrix normal_matrix(Stream& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

inline Matrix random_spd(Stream& rng, Index d) {
  const Matrix a = normal_matrix(rng, d, d);
  return a * a.transpose() + 0.1 * static_cast<double>(d) * Matrix::Identity(d, d);
}

/// Coefficients rescaled so the companion spectral radius equals `radius`.
inline std::vector<Matrix> random_stable(Stream& rng, Index d, int p, double radius) {
  std::vector<Matrix> a;
  for (int j = 0; j < p; ++j) a.push_back(normal_matrix(rng, d, d) / std::sqrt(double(d * p)));
  const Matrix c = svarkit::companion_matrix(a);
  const double rho = Eigen::EigenSolver<Matrix>(c, false).eigenvalues().cwiseAbs().maxCoeff();
  const double s = radius / rho;
  double f = s;
  for (int j = 0; j < p; ++j) {
    a[j] *= f;
    f *= s;
  }
  return a;
}

inline Matrix simulate_var(const std::vector<Matrix>& a, const Matrix& sigma, Index T,
                           std::uint64_t seed, Index burn = 200) {
  svarkit::DgpSpec s;
  s.coeffs = a;
  s.sigma = sigma;
  s.T = T;
  s.burn = burn;
  return svarkit::simulate(s, seed).y;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

}  // namespace testing
