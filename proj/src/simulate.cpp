#include "svarkit/simulate.hpp"

#include <cmath>

#include "svarkit/errors.hpp"
#include "svarkit/rng.hpp"
#include "svarkit/var.hpp"

namespace svarkit {

namespace {

double radius(const std::vector<Matrix>& coeffs) {
  if (coeffs.empty()) return 0.0;
  const Matrix c = companion_matrix(coeffs);
  return Eigen::EigenSolver<Matrix>(c, false).eigenvalues().cwiseAbs().maxCoeff();
}

void check_coeffs(const std::vector<Matrix>& a, Index d) {
  for (const Matrix& m : a)
    require(m.rows() == d && m.cols() == d, ErrorKind::ShapeError,
            "coefficient matrices must be d x d");
}

}  // namespace

SimulatedData simulate(const DgpSpec& spec, std::uint64_t seed) {
  const Index d = spec.sigma.rows();
  require(d >= 1 && spec.sigma.cols() == d, ErrorKind::ShapeError, "sigma must be square");
  require(spec.T >= 1 && spec.burn >= 0, ErrorKind::DomainError, "T must be >= 1, burn >= 0");
  check_coeffs(spec.coeffs, d);
  if (spec.intercept)
    require(spec.intercept->size() == d, ErrorKind::ShapeError, "intercept must have length d");
  require((spec.sigma - spec.sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + spec.sigma.cwiseAbs().maxCoeff()),
          ErrorKind::DomainError, "sigma must be symmetric");

  SimulatedData out;
  out.spectral_radius = radius(spec.coeffs);
  std::vector<Matrix> after = spec.coeffs;
  Index break_at = -1;
  if (spec.kind == DgpKind::Break) {
    require(!spec.coeffs_after.empty(), ErrorKind::DomainError, "break DGP needs coeffs_after");
    check_coeffs(spec.coeffs_after, d);
    after = spec.coeffs_after;
    break_at = spec.break_at.value_or(spec.T / 2);
    require(break_at > 0 && break_at < spec.T, ErrorKind::DomainError, "break index outside sample");
    out.break_index = break_at;
    out.spectral_radius_after = radius(after);
  }
  if (!spec.allow_unstable &&
      (out.spectral_radius >= 1.0 || out.spectral_radius_after >= 1.0))
    fail(ErrorKind::UnstableDgp, "DGP spectral radius " + std::to_string(std::max(out.spectral_radius, out.spectral_radius_after)) + " >= 1");

  out.impact = spec.sigma.cwiseAbs().maxCoeff() == 0.0 ? Matrix::Zero(d, d)
                                                        : lower_cholesky(spec.sigma);
  const int p = static_cast<int>(std::max(spec.coeffs.size(), after.size()));
  const Index total = spec.burn + spec.T;
  Matrix y = Matrix::Zero(total + p, d);  // first p rows are the zero pre-sample
  Matrix w(total, d);
  Stream rng(seed, 0);
  Vector e_prev = Vector::Zero(d);
  const double omega = spec.arch_omega.value_or(1.0 - spec.arch_a);
  if (spec.kind == DgpKind::Arch)
    require(omega > 0.0 && spec.arch_a >= 0.0, ErrorKind::DomainError,
            "ARCH parameters need omega > 0, a >= 0");
  for (Index t = 0; t < total; ++t) {
    Vector e = rng.normal_vector(d);
    w.row(t) = e.transpose();
    if (spec.kind == DgpKind::Arch) {
      for (Index i = 0; i < d; ++i) {
        const double h = omega + spec.arch_a * e_prev(i) * e_prev(i);
        e(i) *= std::sqrt(h);
      }
      e_prev = e;
      w.row(t) = e.transpose();
    }
    const Index row = t + p;
    const bool post = spec.kind == DgpKind::Break && t - spec.burn >= break_at;
    const std::vector<Matrix>& a = post ? after : spec.coeffs;
    Vector yt = out.impact * e;
    if (spec.intercept) yt += *spec.intercept;
    for (std::size_t j = 0; j < a.size(); ++j) yt += a[j] * y.row(row - 1 - j).transpose();
    y.row(row) = yt.transpose();
  }
  out.y = y.bottomRows(spec.T);
  out.shocks = w.bottomRows(spec.T);
  if (spec.kind == DgpKind::Proxy) {
    require(spec.proxy_shock >= 0 && spec.proxy_shock < d, ErrorKind::DomainError,
            "proxy shock index out of range");
    Stream noise(seed, 1);
    Vector z(spec.T);
    for (Index t = 0; t < spec.T; ++t)
      z(t) = spec.proxy_strength * out.shocks(t, spec.proxy_shock) + spec.proxy_noise * noise.normal();
    out.proxy = z;
  }
  return out;
}

}  // namespace svarkit
