#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "svarkit/breaks.hpp"
#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"

using namespace svarkit;
using testing::max_abs;

namespace {

Matrix break_data(std::uint64_t seed, Index T = 2000, bool with_break = true) {
  DgpSpec s;
  s.kind = DgpKind::Break;
  s.coeffs = {0.6 * Matrix::Identity(2, 2)};
  s.coeffs_after = {(with_break ? -0.6 : 0.6) * Matrix::Identity(2, 2)};
  s.sigma = Matrix::Identity(2, 2);
  s.T = T;
  return simulate(s, seed).y;
}

bool near(const std::vector<Index>& v, Index target, Index tol) {
  return std::any_of(v.begin(), v.end(), [&](Index b) { return std::abs(b - target) <= tol; });
}

}  // namespace

TEST_CASE("bridge table") {
  const BridgeTable& t = bridge_table();
  CHECK(t.seed == kBridgeSeed);
  CHECK(t.paths == kBridgePaths);
  CHECK(t.grid == kBridgeGrid);
  REQUIRE(t.probs.size() == 9999);
  CHECK(std::is_sorted(t.sup_abs.begin(), t.sup_abs.end()));
  CHECK(std::is_sorted(t.sup_range.begin(), t.sup_range.end()));

  SUBCASE("closed forms") {
    CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(kuiper_sf(1.7473) == doctest::Approx(0.05).epsilon(1e-2));
    CHECK(kolmogorov_sf(0.0) == 1.0);
  }
  SUBCASE("simulated law agrees with the limit laws") {
    // a discrete grid undershoots each continuous extremum by about
    // 0.5826 / sqrt(grid); shift the limit laws accordingly
    const double shift = 0.5826 / std::sqrt(double(t.grid));
    for (double x : {0.8, 1.0, 1.2, 1.4, 1.6, 1.8}) {
      CHECK(std::abs(bridge_p_value(t, BridgeFunctional::SupAbs, x) - kolmogorov_sf(x + shift)) <
            0.01);
    }
    for (double x : {1.1, 1.3, 1.5, 1.7, 1.9, 2.1}) {
      CHECK(std::abs(bridge_p_value(t, BridgeFunctional::SupRange, x) -
                     kuiper_sf(x + 2.0 * shift)) < 0.01);
    }
    CHECK(bridge_critical(t, BridgeFunctional::SupAbs, 0.05) ==
          doctest::Approx(1.358 - shift).epsilon(0.01));
    CHECK(bridge_critical(t, BridgeFunctional::SupRange, 0.05) ==
          doctest::Approx(1.747 - 2.0 * shift).epsilon(0.01));
  }
  SUBCASE("p-values") {
    CHECK(bridge_p_value(t, BridgeFunctional::SupAbs, 0.0) == 1.0);
    CHECK(bridge_p_value(t, BridgeFunctional::SupAbs, 50.0) == doctest::Approx(1e-4));
    double prev = 1.0;
    for (double x = 0.2; x < 3.0; x += 0.05) {
      const double pv = bridge_p_value(t, BridgeFunctional::SupRange, x);
      CHECK(pv <= prev);
      prev = pv;
    }
  }
  SUBCASE("simulation is thread independent and round-trips") {
    const BridgeTable a = simulate_bridge_table(2000, 200, 5);
    const BridgeTable b = simulate_bridge_table_serial(2000, 200, 5);
    set_worker_count(4);
    const BridgeTable four = simulate_bridge_table(2000, 200, 5);
    set_worker_count(0);
    CHECK(a.sup_abs == b.sup_abs);
    CHECK(a.sup_range == b.sup_range);
    CHECK(a.sup_abs == four.sup_abs);
    const auto path = std::filesystem::temp_directory_path() / "svarkit_bridge_test.csv";
    save_bridge_table(a, path);
    const BridgeTable r = load_bridge_table(path);
    CHECK(r.seed == 5);
    CHECK(r.paths == 2000);
    CHECK(r.grid == 200);
    CHECK(r.sup_abs == a.sup_abs);
    CHECK(r.sup_range == a.sup_range);
    std::filesystem::remove(path);
  }
}

TEST_CASE("CUSUM covariance test") {
  const Vector v = Vector::Ones(2) / std::sqrt(2.0);

  SUBCASE("size and power") {
    int rej0 = 0, rej1 = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
      Stream rng(40, r);
      Matrix y = testing::normal_matrix(rng, 500, 2);
      if (cusum_covariance_test(y, v, v, CusumVariant::Endpoint).reject.at(0.05)) ++rej0;
      y.bottomRows(250) *= std::sqrt(2.0);
      if (cusum_covariance_test(y, v, v, CusumVariant::Endpoint).reject.at(0.05)) ++rej1;
    }
    const double size = double(rej0) / reps;
    CHECK(size >= 0.03);
    CHECK(size <= 0.08);
    CHECK(double(rej1) / reps >= 0.9);
  }
  SUBCASE("process and statistics") {
    Stream rng(41, 0);
    const Matrix y = testing::normal_matrix(rng, 300, 2);
    const CusumResult e = cusum_covariance_test(y, v, v, CusumVariant::Endpoint);
    const CusumResult m = cusum_covariance_test(y, v, v, CusumVariant::MaxDeviation);
    REQUIRE(e.process.size() == 301);
    CHECK(e.process(0) == 0.0);
    CHECK(std::abs(e.process(300)) < 1e-12);
    CHECK(e.statistic == doctest::Approx(e.process.cwiseAbs().maxCoeff()));
    CHECK(m.statistic >= e.statistic);
    CHECK(m.interval.has_value());
    CHECK(e.p_value > 0.0);
    CHECK(e.critical_values.size() == 3);
    // a constant shift changes nothing after demeaning
    Matrix shifted = y;
    shifted.rowwise() += Eigen::RowVector2d(3.0, -7.0);
    const CusumResult s = cusum_covariance_test(shifted, v, v, CusumVariant::Endpoint);
    CHECK(s.statistic == doctest::Approx(e.statistic).epsilon(1e-9));
    CHECK(s.max_location == e.max_location);
  }
  SUBCASE("errors") {
    try {
      cusum_covariance_test(Matrix::Zero(100, 2), v, v, CusumVariant::Endpoint);
      FAIL("expected DegenerateSeries");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateSeries);
    }
    Stream rng(42, 0);
    CHECK_THROWS(cusum_covariance_test(testing::normal_matrix(rng, 19, 2), v, v,
                                       CusumVariant::Endpoint));
    CHECK_THROWS(cusum_covariance_test(testing::normal_matrix(rng, 50, 2), Vector::Ones(3),
                                       Vector::Ones(3), CusumVariant::Endpoint));
    CHECK_THROWS(cusum_covariance_test(testing::normal_matrix(rng, 50, 2), Vector::Zero(2), v,
                                       CusumVariant::Endpoint));
  }
}

namespace {

// KKT conditions of 0.5||x - u||^2 + mu (|u_0| [anchored] + sum |u_i - u_{i-1}|)
void check_tv_kkt(const std::vector<double>& x, const std::vector<double>& u, double mu,
                  bool anchored) {
  const std::size_t n = x.size();
  double tail = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    tail += x[j] - u[j];
    if (j == 0 && !anchored) {
      CHECK(std::abs(tail) < 1e-9);
      break;
    }
    const double jump = j == 0 ? u[0] : u[j] - u[j - 1];
    CHECK(std::abs(tail) <= mu + 1e-9);
    if (std::abs(jump) > 1e-12) CHECK(std::abs(tail - mu * (jump > 0 ? 1.0 : -1.0)) < 1e-9);
  }
}

}  // namespace

TEST_CASE("total variation prox") {
  Stream rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 25;
    std::vector<double> x(n);
    for (double& v : x) v = 3.0 * rng.normal() + (rng.uniform() < 0.3 ? 5.0 : 0.0);
    const double mu = 0.05 + 2.0 * rng.uniform();
    check_tv_kkt(x, tv_denoise(x, mu), mu, false);
    check_tv_kkt(x, tv_denoise_anchored(x, mu), mu, true);
  }
  const std::vector<double> x = {1.0, 4.0, -2.0};
  CHECK(tv_denoise(x, 0.0) == x);
  const std::vector<double> flat = tv_denoise(x, 100.0);
  for (double v : flat) CHECK(v == doctest::Approx(1.0));
  for (double v : tv_denoise_anchored(x, 100.0)) CHECK(v == 0.0);
}

TEST_CASE("BSS solver") {
  SUBCASE("no penalty reproduces per-block OLS") {
    Stream rng(4, 0);
    Matrix y = testing::normal_matrix(rng, 121, 2);
    BssOptions opt;
    opt.tol = 1e-16;
    opt.max_iter = 200000;
    const BssFit f = bss_detect(y, 1, 40, 0.0, 0.0, opt);
    REQUIRE(f.levels.size() == 3);
    for (int i = 0; i < 3; ++i) {
      const Index s = f.block_starts[i];
      const Matrix x = lag_design(y, 1, false, s).topRows(40);
      const Matrix b = x.colPivHouseholderQr().solve(y.middleRows(s, 40));
      CHECK(max_abs(f.levels[i] - b) < 1e-6);
    }
  }
  SUBCASE("objective never increases") {
    const Matrix y = break_data(5, 600);
    const double lmax = bss_lambda_max(y, 1, 25);
    const BssFit f = bss_detect(y, 1, 25, 0.05 * lmax, 0.01 * lmax);
    for (std::size_t i = 1; i < f.objective_trace.size(); ++i)
      CHECK(f.objective_trace[i] <= f.objective_trace[i - 1]);
    CHECK(f.converged);
    CHECK(f.candidates.size() == f.candidate_norms.size());
  }
  SUBCASE("lambda_max silences every jump") {
    const Matrix y = break_data(6, 600);
    const double lmax = bss_lambda_max(y, 1, 25);
    CHECK(bss_detect(y, 1, 25, lmax, 0.0).candidates.empty());
    CHECK(bss_detect(y, 1, 25, 2.0 * lmax, 0.0).candidates.empty());
    CHECK_FALSE(bss_detect(y, 1, 25, 0.01 * lmax, 0.0).candidates.empty());
  }
  SUBCASE("huge lambda2 empties the candidate set") {
    const Matrix y = break_data(7, 600);
    const BssFit f = bss_detect(y, 1, 25, 1e-4, 1e6);
    CHECK(f.candidates.empty());
    for (const Matrix& l : f.levels) CHECK(l.isZero(0.0));
  }
  SUBCASE("preconditions") {
    const Matrix y = break_data(8, 100);
    CHECK_THROWS(bss_detect(y, 1, 3, 0.1, 0.0));
    CHECK_THROWS(bss_detect(y, 1, 120, 0.1, 0.0));
    CHECK_THROWS(bss_detect(y, 0, 20, 0.1, 0.0));
  }
}

TEST_CASE("LIC screening") {
  const Index T = 2000;
  const Index a_n = 45;
  const double omega = 4.0 * std::log(double(T - 1));
  SUBCASE("empty candidates") {
    const LicResult r = lic_screen(break_data(1, 400), {}, 1, 20, omega);
    CHECK(r.breaks.empty());
  }
  SUBCASE("adjacent candidates around one break") {
    int one = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix y = break_data(100 + rep, T);
      const LicResult r = lic_screen(y, {980, 1020}, 1, a_n, omega);
      CHECK(std::includes(std::begin({980, 1020}), std::end({980, 1020}), r.breaks.begin(),
                          r.breaks.end()));
      if (r.breaks.size() == 1) ++one;
    }
    CHECK(one >= 90);
  }
  SUBCASE("spurious candidate dropped") {
    int good = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix y = break_data(300 + rep, T);
      const LicResult r = lic_screen(y, {500, 1000}, 1, a_n, omega);
      if (r.breaks == std::vector<Index>{1000}) ++good;
    }
    CHECK(good >= 85);
  }
  SUBCASE("many candidates use the greedy path and stay inside the set") {
    const Matrix y = break_data(9, T);
    std::vector<Index> c;
    for (Index t = 100; t < 1900; t += 100) c.push_back(t);
    const LicResult r = lic_screen(y, c, 1, a_n, omega);
    CHECK_FALSE(r.exhaustive);
    for (Index b : r.breaks) CHECK(std::find(c.begin(), c.end(), b) != c.end());
    CHECK(near(r.breaks, 1000, 0));
  }
}

TEST_CASE("break detection Monte Carlo") {
  const Index T = 2000;
  const Index bn = 45;
  int cand_hit = 0, final_hit = 0, small = 0, false_pos = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const BreakReport r = detect_breaks(break_data(500 + rep, T), 1);
    CHECK(r.block == bn);
    if (near(r.candidates, 1000, bn)) ++cand_hit;
    if (r.final_breaks.size() == 1 && near(r.final_breaks, 1000, bn)) ++final_hit;
    for (Index b : r.final_breaks)
      CHECK(std::find(r.candidates.begin(), r.candidates.end(), b) != r.candidates.end());

    const BreakReport z = detect_breaks(break_data(700 + rep, T, false), 1);
    if (z.candidates.size() <= 2) ++small;
    if (!z.final_breaks.empty()) ++false_pos;
  }
  INFO("candidates near the break " << cand_hit << ", final " << final_hit << ", small sets "
                                    << small << ", false positives " << false_pos);
  CHECK(cand_hit >= 90);
  CHECK(final_hit >= 85);
  CHECK(small >= 90);
  CHECK(false_pos <= 10);
}

TEST_CASE("break detection is thread independent") {
  const Matrix y = break_data(11, 1000);
  const BreakReport a = detect_breaks(y, 1);
  const BreakReport s = detect_breaks_serial(y, 1);
  set_worker_count(4);
  const BreakReport four = detect_breaks(y, 1);
  set_worker_count(0);
  CHECK(a.final_breaks == s.final_breaks);
  CHECK(a.candidates == s.candidates);
  CHECK(a.lambda1 == s.lambda1);
  CHECK(a.score == s.score);
  CHECK(a.final_breaks == four.final_breaks);
  REQUIRE(a.segments.size() == a.final_breaks.size() + 1);
  CHECK(a.segment_rows.front().first == 1);
  CHECK(a.segment_rows.back().second == 1000);
}
