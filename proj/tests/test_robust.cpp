#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"
#include "svarkit/robust.hpp"

using namespace svarkit;
using testing::max_abs;

namespace {

const Matrix kA{{0.5, 0.1}, {0.0, 0.3}};

Matrix clean_data(std::uint64_t seed, Index T = 1000) {
  return testing::simulate_var({kA}, Matrix::Identity(2, 2), T, seed);
}

// additive outliers of 10 sigma on a random tenth of the rows
Matrix contaminate(Matrix y, std::uint64_t seed, double share = 0.1) {
  Stream rng(seed, 99);
  for (Index t = 0; t < y.rows(); ++t)
    if (rng.uniform() < share)
      for (Index j = 0; j < y.cols(); ++j) y(t, j) += (rng.uniform() < 0.5 ? -10.0 : 10.0);
  return y;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("consistency factor") {
  CHECK(consistency_factor(0.0, 3) == 1.0);
  for (double a : {0.01, 0.1, 0.25, 0.5}) {
    // d = 2: chi2_2 quantile is -2 log a and F_{chi2_4}(q) = 1 - a (1 - log a)
    const double expected = (1.0 - a) / (1.0 - a + a * std::log(a));
    CHECK(consistency_factor(a, 2) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(consistency_factor(a, 2) > 1.0);
  }
}

TEST_CASE("zero trimming is OLS") {
  const Matrix y = clean_data(1, 300);
  MltsSearch cfg;
  cfg.seed = 4;
  const RobustVarModel r = fit_mlts(y, 2, 0.0, cfg);
  const VarModel o = fit_var(y, 2, true);
  CHECK(r.h == o.nobs_effective);
  CHECK(r.c_factor == 1.0);
  for (int j = 0; j < 2; ++j) CHECK(max_abs(r.model.coeffs[j] - o.coeffs[j]) < 1e-12);
  CHECK(max_abs(r.model.sigma_u - o.sigma_u) < 1e-12);
}

TEST_CASE("concentration steps never increase the determinant") {
  const Matrix y = contaminate(clean_data(2, 400), 2);
  const Matrix x = lag_design(y, 1, true, 1);
  const Matrix t = y.bottomRows(399);
  const Index h = 300;
  Stream rng(5, 0);
  for (int start = 0; start < 20; ++start) {
    std::vector<Index> rows;
    while (rows.size() < std::size_t(h)) {
      const Index r = Index(rng.index(399));
      if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end());
    SubsetFit f = subset_fit(x, t, rows);
    for (int step = 0; step < 15; ++step) {
      rows = concentration_step(x, t, f, h);
      const SubsetFit g = subset_fit(x, t, rows);
      CHECK(g.det <= f.det * (1.0 + 1e-12));
      f = g;
    }
  }
}

TEST_CASE("clean data: MLTS close to OLS") {
  int close = 0;
  MltsSearch cfg;
  for (int r = 0; r < 100; ++r) {
    const Matrix y = clean_data(100 + r);
    cfg.seed = r;
    const RobustVarModel m = fit_mlts(y, 1, 0.25, cfg);
    if (max_abs(m.model.coeffs[0] - fit_var(y, 1, true).coeffs[0]) < 0.1) ++close;
  }
  CHECK(close >= 95);
}

TEST_CASE("contamination: RMLTS beats OLS") {
  std::vector<double> err_r, err_o;
  MltsSearch cfg;
  for (int r = 0; r < 100; ++r) {
    const Matrix y = contaminate(clean_data(300 + r), 300 + r);
    cfg.seed = r;
    const RobustVarModel m = reweight_rmlts(fit_mlts(y, 1, 0.25, cfg), 0.01);
    err_r.push_back(max_abs(m.model.coeffs[0] - kA));
    err_o.push_back(max_abs(fit_var(y, 1, true).coeffs[0] - kA));
  }
  CHECK(median(err_r) < median(err_o));
}

TEST_CASE("reweighting") {
  MltsSearch cfg;
  SUBCASE("flag rate on clean data") {
    const double delta = 0.01;
    double total = 0.0;
    const int reps = 40;
    Index n = 0;
    for (int r = 0; r < reps; ++r) {
      cfg.seed = r;
      const RobustVarModel m = reweight_rmlts(fit_mlts(clean_data(500 + r), 1, 0.25, cfg), delta);
      n = m.model.nobs_effective + Index(m.flagged_outliers.size());
      total += double(m.flagged_outliers.size());
    }
    const double mean = total / reps;
    CHECK(std::abs(mean - delta * n) <= 3.0 * std::sqrt(n * delta * (1.0 - delta)));
  }
  SUBCASE("single gross outlier is flagged") {
    int hit = 0;
    for (int r = 0; r < 100; ++r) {
      Matrix y = clean_data(700 + r, 300);
      y.row(150) += Eigen::RowVector2d(25.0, -25.0);
      cfg.seed = r;
      const RobustVarModel m = reweight_rmlts(fit_mlts(y, 1, 0.25, cfg), 0.01);
      // target row 150 is effective row 149
      if (std::find(m.flagged_outliers.begin(), m.flagged_outliers.end(), 149) !=
          m.flagged_outliers.end())
        ++hit;
    }
    CHECK(hit >= 99);
  }
  SUBCASE("nothing flagged reduces to OLS") {
    const Matrix y = clean_data(9, 300);
    cfg.seed = 1;
    const RobustVarModel m = reweight_rmlts(fit_mlts(y, 1, 0.25, cfg), 1e-12);
    CHECK(m.flagged_outliers.empty());
    const VarModel o = fit_var(y, 1, true);
    CHECK(max_abs(m.model.coeffs[0] - o.coeffs[0]) < 1e-12);
    CHECK(max_abs(m.model.sigma_u - m.c_factor * o.sigma_u) < 1e-12);
  }
}

TEST_CASE("affine equivariance with a fixed seed") {
  const Matrix y = clean_data(11, 400);
  const Matrix mm{{1.0, 0.4}, {-0.3, 2.0}};
  MltsSearch cfg;
  cfg.seed = 3;
  const RobustVarModel a = fit_mlts(y, 1, 0.25, cfg);
  const RobustVarModel b = fit_mlts(Matrix(y * mm.transpose()), 1, 0.25, cfg);
  REQUIRE(a.subset == b.subset);
  CHECK(max_abs(b.model.coeffs[0] - mm * a.model.coeffs[0] * mm.inverse()) < 1e-8);
  CHECK(max_abs(b.model.sigma_u - mm * a.model.sigma_u * mm.transpose()) < 1e-8);
}

TEST_CASE("search is deterministic and thread-independent") {
  const Matrix y = contaminate(clean_data(12, 300), 12);
  MltsSearch cfg;
  cfg.seed = 77;
  const RobustVarModel a = fit_mlts(y, 2, 0.25, cfg);
  const RobustVarModel s = fit_mlts_serial(y, 2, 0.25, cfg);
  set_worker_count(4);
  const RobustVarModel four = fit_mlts(y, 2, 0.25, cfg);
  set_worker_count(0);
  CHECK(a.subset == s.subset);
  CHECK(a.subset == four.subset);
  CHECK(a.objective == s.objective);
  CHECK((a.model.coeffs[1].array() == s.model.coeffs[1].array()).all());
  CHECK(std::is_sorted(a.subset.begin(), a.subset.end()));
}

TEST_CASE("preconditions") {
  MltsSearch cfg;
  const Matrix y = clean_data(13, 12);
  try {
    fit_mlts(y, 2, 0.5, cfg);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
}

TEST_CASE("robust order selection") {
  MltsSearch cfg;
  cfg.starts = 100;
  SUBCASE("pmax = 0") {
    const IcTable t = robust_order_select(clean_data(1, 200), 0, 0.25, 0.01, cfg);
    CHECK(t.rows.size() == 1);
    CHECK(t.best_bic == 0);
  }
  SUBCASE("clean AR(2): robust BIC tracks classical BIC") {
    int rob = 0, cls = 0;
    for (int r = 0; r < 100; ++r) {
      const Matrix y = testing::simulate_var({testing::scalar(0.9), testing::scalar(-0.18)},
                                             testing::scalar(1.0), 500, 800 + r);
      cfg.seed = r;
      if (robust_order_select(y, 4, 0.25, 0.01, cfg).best_bic == 2) ++rob;
      if (ic_table(y, 4, true).best_bic == 2) ++cls;
    }
    CHECK(std::abs(rob - cls) <= 10);
  }
  SUBCASE("AR(1) with outliers") {
    int rob = 0, cls = 0;
    for (int r = 0; r < 100; ++r) {
      const Matrix y = contaminate(
          testing::simulate_var({testing::scalar(0.6)}, testing::scalar(1.0), 500, 900 + r), 900 + r);
      cfg.seed = r;
      if (robust_order_select(y, 4, 0.25, 0.01, cfg).best_bic == 1) ++rob;
      if (ic_table(y, 4, true).best_bic == 1) ++cls;
    }
    INFO("robust " << rob << " classical " << cls);
    CHECK(rob > cls);
  }
}
