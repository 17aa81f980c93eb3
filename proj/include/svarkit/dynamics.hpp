#pragma once

#include <optional>
#include <vector>

#include "svarkit/datamodel.hpp"
#include "svarkit/ident.hpp"

namespace svarkit {

/// theta[h](i, k): response of variable i at horizon h to shock k.
struct ImpulseResponseSet {
  std::vector<Matrix> theta;
  std::optional<std::vector<Matrix>> lower;
  std::optional<std::vector<Matrix>> upper;

  int horizon() const { return static_cast<int>(theta.size()) - 1; }
};

/// Theta_h = Phi_h * impact for h = 0..H.
ImpulseResponseSet irf(const StructuralModel& sm, int horizon);

/// share[h-1](j, k): share of shock k in the h-step forecast-error variance of
/// variable j, for h = 1..H.
struct FevdTable {
  std::vector<Matrix> share;
};

FevdTable fevd(const StructuralModel& sm, int horizon);

struct HistoricalDecomposition {
  /// contribution[k](t, i): part of y_{t,i} explained by shock k, t over the
  /// effective sample (rows p..T-1 of the data).
  std::vector<Matrix> contribution;
  Matrix remainder;  // n x d initial-condition part
  Matrix shocks;     // n x d recovered structural shocks
  Matrix observed;   // n x d
};

HistoricalDecomposition historical_decomposition(const StructuralModel& sm,
                                                 const TimeSeriesDataset& ds);
HistoricalDecomposition historical_decomposition(const StructuralModel& sm, const Matrix& y);

struct ConnectednessTable {
  Matrix raw;         // d x d generalized FEVD
  Matrix normalized;  // rows sum to one
  Vector from;        // sum of off-diagonal row entries
  Vector to;          // sum of off-diagonal column entries
  Vector net;         // to - from
  double total = 0;   // off-diagonal mass / d
  int horizon = 0;
};

ConnectednessTable gfevd_connectedness(const VarModel& m, int horizon);

}  // namespace svarkit
