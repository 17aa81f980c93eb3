#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace svarkit {

enum class BridgeFunctional { SupAbs, SupRange };

/// Simulated quantiles of sup|B(s)| and sup|B(s) - B(t)| for a Brownian bridge.
struct BridgeTable {
  std::uint64_t seed = 0;
  int paths = 0;
  int grid = 0;
  std::vector<double> probs;  // i / 10000, i = 1..9999
  std::vector<double> sup_abs;
  std::vector<double> sup_range;

  const std::vector<double>& column(BridgeFunctional f) const {
    return f == BridgeFunctional::SupAbs ? sup_abs : sup_range;
  }
};

inline constexpr std::uint64_t kBridgeSeed = 20240611;
inline constexpr int kBridgePaths = 100000;
inline constexpr int kBridgeGrid = 1000;

BridgeTable simulate_bridge_table(int paths, int grid, std::uint64_t seed);
BridgeTable simulate_bridge_table_serial(int paths, int grid, std::uint64_t seed);

void save_bridge_table(const BridgeTable& t, const std::filesystem::path& path);
BridgeTable load_bridge_table(const std::filesystem::path& path);

/// Shipped table path (SVARKIT_CRITVALS overrides).
std::filesystem::path default_bridge_table_path();
/// Loaded once per process; simulated with the default settings when the
/// file is missing.
const BridgeTable& bridge_table();

/// Upper-tail probability by linear interpolation in the quantile table;
/// clamped to [1e-4, 1].
double bridge_p_value(const BridgeTable& t, BridgeFunctional f, double stat);
/// Upper-tail critical value at the given level.
double bridge_critical(const BridgeTable& t, BridgeFunctional f, double level);

/// Closed forms (Kolmogorov and Kuiper limits), used as test oracles.
double kolmogorov_sf(double x);
double kuiper_sf(double x);

}  // namespace svarkit
