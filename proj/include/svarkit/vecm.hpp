#pragma once

#include <optional>
#include <vector>

#include "svarkit/datamodel.hpp"
#include "svarkit/var.hpp"

namespace svarkit {

/// Delta y_t = nu + Pi y_{t-1} + sum_{i=1}^{p-1} Gamma_i Delta y_{t-i} + u_t.
struct VecmModel {
  Matrix pi;                   // sum A_j - I
  std::vector<Matrix> gammas;  // Gamma_i = -sum_{j>i} A_j
  std::optional<Vector> intercept;
  std::optional<Matrix> alpha;  // d x r loadings, pi = alpha beta'
  std::optional<Matrix> beta;   // d x r cointegrating vectors
  Matrix sigma_u;
};

VecmModel var_to_vecm(const VarModel& m);
VarModel vecm_to_var(const VecmModel& v);

/// Attaches a factorization pi = alpha beta' after rank checks.
void set_cointegration(VecmModel& v, const Matrix& alpha, const Matrix& beta);

struct PermanentTransitory {
  Matrix permanent;  // T x d
  Matrix transitory;
  Matrix permanent_loading;   // beta_perp (alpha_perp' beta_perp)^{-1} alpha_perp'
  Matrix transitory_loading;  // alpha (beta' alpha)^{-1} beta'
};

/// Common-trends loading C = beta_perp (alpha_perp' beta_perp)^{-1} alpha_perp'.
Matrix longrun_C(const Matrix& alpha, const Matrix& beta);

PermanentTransitory gg_decompose(const Matrix& alpha, const Matrix& beta, const Matrix& y);
PermanentTransitory gg_decompose(const Matrix& alpha, const Matrix& beta,
                                 const TimeSeriesDataset& ds);

}  // namespace svarkit
