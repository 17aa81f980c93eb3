#include "svarkit/vecm.hpp"

#include "svarkit/errors.hpp"

namespace svarkit {

VecmModel var_to_vecm(const VarModel& m) {
  require(m.p >= 1, ErrorKind::InvalidOrder, "VECM form needs p >= 1");
  const Index d = m.d;
  VecmModel v;
  v.pi = -Matrix::Identity(d, d);
  for (const auto& a : m.coeffs) v.pi += a;
  for (int i = 1; i < m.p; ++i) {
    Matrix g = Matrix::Zero(d, d);
    for (int j = i + 1; j <= m.p; ++j) g -= m.coeffs[j - 1];
    v.gammas.push_back(std::move(g));
  }
  v.intercept = m.intercept;
  v.sigma_u = m.sigma_u;
  return v;
}

VarModel vecm_to_var(const VecmModel& v) {
  const Index d = v.pi.rows();
  require(v.pi.cols() == d, ErrorKind::ShapeError, "Pi must be square");
  for (const auto& g : v.gammas)
    require(g.rows() == d && g.cols() == d, ErrorKind::ShapeError, "Gamma_i must be d x d");
  if (v.sigma_u.size())
    require(v.sigma_u.rows() == d && v.sigma_u.cols() == d, ErrorKind::ShapeError,
            "Sigma_u must be d x d");
  const int p = static_cast<int>(v.gammas.size()) + 1;
  // A_1 = I + Pi + Gamma_1, A_i = Gamma_i - Gamma_{i-1}, A_p = -Gamma_{p-1}
  std::vector<Matrix> a(p, Matrix::Zero(d, d));
  a[0] = Matrix::Identity(d, d) + v.pi;
  for (int i = 1; i <= p - 1; ++i) {
    a[i - 1] += v.gammas[i - 1];
    a[i] -= v.gammas[i - 1];
  }
  Matrix sigma = v.sigma_u.size() ? v.sigma_u : Matrix(Matrix::Identity(d, d));
  return make_var(std::move(a), std::move(sigma), v.intercept);
}

namespace {

Index column_rank(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * std::max(1.0, s(0))) ++r;
  return r;
}

void check_pair(const Matrix& alpha, const Matrix& beta) {
  require(alpha.rows() == beta.rows() && alpha.cols() == beta.cols(), ErrorKind::ShapeError,
          "alpha and beta must both be d x r");
  const Index d = alpha.rows();
  const Index r = alpha.cols();
  require(r > 0 && r < d, ErrorKind::RankDeficient, "cointegration rank must satisfy 0 < r < d");
  require(column_rank(alpha) == r && column_rank(beta) == r, ErrorKind::RankDeficient,
          "alpha and beta must have full column rank");
}

Matrix checked_inverse(const Matrix& a, const char* what) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-10 * s(0)))
    fail(ErrorKind::NonInvertibleLoading, std::string(what) + " is not invertible");
  return a.partialPivLu().inverse();
}

}  // namespace

void set_cointegration(VecmModel& v, const Matrix& alpha, const Matrix& beta) {
  check_pair(alpha, beta);
  require(alpha.rows() == v.pi.rows(), ErrorKind::ShapeError, "alpha/beta row count != d");
  if ((v.pi - alpha * beta.transpose()).norm() >= 1e-10)
    fail(ErrorKind::ShapeError, "Pi differs from alpha beta'");
  v.alpha = alpha;
  v.beta = beta;
}

Matrix longrun_C(const Matrix& alpha, const Matrix& beta) {
  check_pair(alpha, beta);
  const Matrix a_perp = orthogonal_complement(alpha);
  const Matrix b_perp = orthogonal_complement(beta);
  return b_perp * checked_inverse(a_perp.transpose() * b_perp, "alpha_perp' beta_perp") *
         a_perp.transpose();
}

PermanentTransitory gg_decompose(const Matrix& alpha, const Matrix& beta, const Matrix& y) {
  require(y.cols() == alpha.rows(), ErrorKind::ShapeError, "data width != rows of alpha");
  PermanentTransitory out;
  out.permanent_loading = longrun_C(alpha, beta);
  out.transitory_loading =
      alpha * checked_inverse(beta.transpose() * alpha, "beta' alpha") * beta.transpose();
  out.permanent = y * out.permanent_loading.transpose();
  out.transitory = y * out.transitory_loading.transpose();
  return out;
}

PermanentTransitory gg_decompose(const Matrix& alpha, const Matrix& beta,
                                 const TimeSeriesDataset& ds) {
  return gg_decompose(alpha, beta, ds.values());
}

}  // namespace svarkit
