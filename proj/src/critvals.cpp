#include "svarkit/critvals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"
#include "svarkit/rng.hpp"

#ifndef SVARKIT_DATA_DIR
#define SVARKIT_DATA_DIR "data"
#endif

namespace svarkit {

namespace {

constexpr int kProbSteps = 10000;

void bridge_path(int grid, std::uint64_t seed, int path, double& sup_abs, double& sup_range) {
  Stream rng(seed, static_cast<std::uint64_t>(path));
  const double sd = 1.0 / std::sqrt(static_cast<double>(grid));
  std::vector<double> w(grid + 1, 0.0);
  for (int k = 1; k <= grid; ++k) w[k] = w[k - 1] + sd * rng.normal();
  double hi = 0.0, lo = 0.0, ab = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double b = w[k] - (static_cast<double>(k) / grid) * w[grid];
    hi = std::max(hi, b);
    lo = std::min(lo, b);
    ab = std::max(ab, std::abs(b));
  }
  sup_abs = ab;
  sup_range = hi - lo;
}

BridgeTable finish(std::vector<double> a, std::vector<double> r, int paths, int grid,
                   std::uint64_t seed) {
  std::sort(a.begin(), a.end());
  std::sort(r.begin(), r.end());
  BridgeTable t;
  t.seed = seed;
  t.paths = paths;
  t.grid = grid;
  auto q = [](const std::vector<double>& s, double p) {
    const double h = (static_cast<double>(s.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  for (int i = 1; i < kProbSteps; ++i) {
    const double p = static_cast<double>(i) / kProbSteps;
    t.probs.push_back(p);
    t.sup_abs.push_back(q(a, p));
    t.sup_range.push_back(q(r, p));
  }
  return t;
}

void check_args(int paths, int grid) {
  require(paths >= 2 && grid >= 2, ErrorKind::DomainError, "bridge table needs paths, grid >= 2");
}

}  // namespace

BridgeTable simulate_bridge_table(int paths, int grid, std::uint64_t seed) {
  check_args(paths, grid);
  std::vector<double> a(paths), r(paths);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (int i = 0; i < paths; ++i) bridge_path(grid, seed, i, a[i], r[i]);
  return finish(std::move(a), std::move(r), paths, grid, seed);
}

BridgeTable simulate_bridge_table_serial(int paths, int grid, std::uint64_t seed) {
  check_args(paths, grid);
  std::vector<double> a(paths), r(paths);
  for (int i = 0; i < paths; ++i) bridge_path(grid, seed, i, a[i], r[i]);
  return finish(std::move(a), std::move(r), paths, grid, seed);
}

void save_bridge_table(const BridgeTable& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << "# brownian bridge functionals; seed=" << t.seed << " paths=" << t.paths
      << " grid=" << t.grid << "\n";
  out << "prob,sup_abs,sup_range\n";
  out.precision(17);
  for (std::size_t i = 0; i < t.probs.size(); ++i)
    out << t.probs[i] << ',' << t.sup_abs[i] << ',' << t.sup_range[i] << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

BridgeTable load_bridge_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  BridgeTable t;
  std::string line;
  std::getline(in, line);
  {
    auto field = [&](const std::string& key) -> std::string {
      const auto pos = line.find(key + "=");
      if (pos == std::string::npos) fail(ErrorKind::ParseError, "missing " + key + " in table header");
      std::istringstream ss(line.substr(pos + key.size() + 1));
      std::string v;
      ss >> v;
      return v;
    };
    t.seed = std::stoull(field("seed"));
    t.paths = std::stoi(field("paths"));
    t.grid = std::stoi(field("grid"));
  }
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double p, a, r;
    char c1, c2;
    std::istringstream ss(line);
    if (!(ss >> p >> c1 >> a >> c2 >> r))
      fail(ErrorKind::ParseError, "bad bridge table line: " + line);
    t.probs.push_back(p);
    t.sup_abs.push_back(a);
    t.sup_range.push_back(r);
  }
  if (t.probs.size() != static_cast<std::size_t>(kProbSteps - 1))
    fail(ErrorKind::ShapeError, "bridge table has unexpected length");
  return t;
}

std::filesystem::path default_bridge_table_path() {
  if (const char* env = std::getenv("SVARKIT_CRITVALS"); env && *env) return env;
  return std::filesystem::path(SVARKIT_DATA_DIR) / "bridge_critvals.csv";
}

const BridgeTable& bridge_table() {
  static BridgeTable table;
  static std::once_flag once;
  std::call_once(once, [] {
    const auto path = default_bridge_table_path();
    if (std::filesystem::exists(path)) {
      table = load_bridge_table(path);
    } else {
      table = simulate_bridge_table(kBridgePaths, kBridgeGrid, kBridgeSeed);
    }
  });
  return table;
}

double bridge_p_value(const BridgeTable& t, BridgeFunctional f, double stat) {
  const auto& q = t.column(f);
  if (stat <= q.front()) return 1.0;
  if (stat >= q.back()) return 1.0 - t.probs.back();
  const auto it = std::upper_bound(q.begin(), q.end(), stat);
  const std::size_t hi = static_cast<std::size_t>(it - q.begin());
  const std::size_t lo = hi - 1;
  const double span = q[hi] - q[lo];
  const double w = span > 0 ? (stat - q[lo]) / span : 0.0;
  const double cdf = t.probs[lo] + w * (t.probs[hi] - t.probs[lo]);
  return std::clamp(1.0 - cdf, 1.0 - t.probs.back(), 1.0);
}

double bridge_critical(const BridgeTable& t, BridgeFunctional f, double level) {
  require(level > 0.0 && level < 1.0, ErrorKind::DomainError, "level must lie in (0,1)");
  const auto& q = t.column(f);
  const double pos = (1.0 - level) * kProbSteps - 1.0;  // index into probs
  if (pos <= 0) return q.front();
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= q.size()) return q.back();
  const double w = pos - static_cast<double>(lo);
  return q[lo] + w * (q[lo + 1] - q[lo]);
}

double kolmogorov_sf(double x) {
  if (x <= 0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

double kuiper_sf(double x) {
  if (x <= 0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double kx2 = static_cast<double>(k * k) * x * x;
    const double term = (8.0 * kx2 - 2.0) * std::exp(-2.0 * kx2);
    s += term;
    if (std::abs(term) < 1e-18 && k > 2) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace svarkit
