#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svarkit/var.hpp"

namespace svarkit {

enum class Scheme { Recursive, LongRun, ProxyColumn, SignSet };

const char* scheme_name(Scheme s);

/// Normalization record of a proxy-identified column.
struct ProxyRecord {
  Index target = 0;
  Vector raw_cov;     // (1/n) sum u_t z_t
  double scale = 0;   // sqrt(raw' Sigma^{-1} raw), the implied |phi|
  double first_stage_f = 0;
};

/// Reduced-form model plus impact matrix: u_t = impact * w_t, Var(w_t) = I.
struct StructuralModel {
  VarModel base;
  Matrix impact;
  Scheme scheme = Scheme::Recursive;
  std::vector<std::string> shock_names;
  std::optional<ProxyRecord> proxy;
  /// Long-run impact Theta(1) for the long-run scheme.
  std::optional<Matrix> longrun_impact;
};

/// Cholesky identification under a variable ordering: order[k] is the
/// variable placed k-th. Columns of the impact are shocks in that order.
StructuralModel identify_recursive(const VarModel& m, const std::vector<int>& order = {});

/// Lower-triangular long-run impact Theta(1) = chol(C(1) Sigma C(1)'),
/// C(1) = (I - sum A_j)^{-1}; impact = C(1)^{-1} Theta(1).
StructuralModel identify_longrun(const VarModel& m);

struct ProxyOptions {
  double min_f = 10.0;
  bool allow_weak = false;
};

/// External-instrument identification of impact column k from the
/// instrument z aligned with the residual rows.
StructuralModel identify_proxy(const VarModel& m, const Vector& z, Index k,
                               const ProxyOptions& opts = {});

/// Weight for the covariance-matching criterion: inverse sample covariance
/// of vech(u_t u_t').
Matrix vech_weight(const Matrix& residuals);

/// Degrees of freedom: d(d+1)/2 moments minus (d^2 - n_restrictions) free
/// impact entries. Throws NegativeDf when under-identified.
TestResult j_test(const VarModel& m, const Matrix& impact_candidate, int n_restrictions);

/// Minimizes the J criterion over impact matrices whose entries flagged in
/// `zero_mask` are fixed at zero (Levenberg-Marquardt from the Cholesky factor
/// with the restricted entries removed).
Matrix gmm_restricted_impact(const VarModel& m, const Eigen::MatrixX<bool>& zero_mask,
                             int max_iter = 200);

/// Equality (Z'b = 0) and sign (S'b >= 0) restrictions on impact column b.
struct SignRestrictionSet {
  Matrix z;  // d x m_z
  Matrix s;  // d x m_s
  Index target_shock = 0;
};

struct IrfBoundInterval {
  int horizon = 0;
  Index response = 0;
  Index shock = 0;
  double lower = 0;
  double upper = 0;
  double ci_lower = 0;
  double ci_upper = 0;
  double sigma_lower = 0;
  double sigma_upper = 0;
  double sigma_hat = 0;  // max of the two
  double level = 0.9;
  bool has_ci = false;
};

/// Bounds of e_i' Phi_k b over {b : b' Sigma^{-1} b = 1, Z'b = 0, S'b >= 0}
/// by enumeration of active inequality subsets, with delta-method intervals
/// when the model carries residuals.
IrfBoundInterval sign_restriction_bounds(const VarModel& m, const SignRestrictionSet& r,
                                         int horizon, Index response, double level = 0.9);

}  // namespace svarkit
