#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "svarkit/numeric.hpp"

namespace svarkit {

enum class DgpKind { Var, Arch, Break, Proxy };

struct DgpSpec {
  DgpKind kind = DgpKind::Var;
  std::vector<Matrix> coeffs;  // A_1..A_p
  std::optional<Vector> intercept;
  Matrix sigma;  // innovation covariance; all zeros gives a noiseless path
  Index T = 100;
  Index burn = 100;
  // Arch: e_it = sqrt(h_it) eps_it, h_it = omega + a e_{i,t-1}^2, u_t = chol(sigma) e_t;
  // omega defaults to 1 - a (unit unconditional variance)
  double arch_a = 0.5;
  std::optional<double> arch_omega;
  // Break: coefficients switch to coeffs_after from output row break_at on
  std::vector<Matrix> coeffs_after;
  std::optional<Index> break_at;  // default T / 2
  // Proxy: z_t = strength * w_{shock,t} + noise * eta_t
  int proxy_shock = 0;
  double proxy_strength = 1.0;
  double proxy_noise = 0.0;
  bool allow_unstable = false;
};

struct SimulatedData {
  Matrix y;        // T x d
  Matrix shocks;   // structural shocks w_t (T x d); u_t = impact w_t
  Matrix impact;   // lower Cholesky factor of sigma
  std::optional<Vector> proxy;
  std::optional<Index> break_index;
  double spectral_radius = 0.0;
  double spectral_radius_after = 0.0;
};

/// Deterministic in (spec, seed). Pre-sample values are zero; the first
/// `burn` simulated rows are discarded. UnstableDgp when a companion matrix
/// has spectral radius >= 1 unless allow_unstable.
SimulatedData simulate(const DgpSpec& spec, std::uint64_t seed);

}  // namespace svarkit
