#include <doctest.h>

#include "support.hpp"
#include "svarkit/errors.hpp"
#include "svarkit/localproj.hpp"

using namespace svarkit;
using testing::max_abs;

TEST_CASE("h = 1 projection equals the VAR(p+1) first lag") {
  Stream rng(1, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testing::random_stable(rng, 3, 2, 0.8);
    const Matrix y = testing::simulate_var(a, testing::random_spd(rng, 3), 150 + 20 * trial, 10 + trial);
    for (int p : {0, 1, 2}) {
      const VarModel v = fit_var(y, p + 1, true);
      for (Index i = 0; i < 3; ++i) {
        const LpEstimate e = fit_lp(y, 1, p, i);
        CHECK(e.beta.rows() == 1);
        CHECK(e.beta.cols() == 3);
        CHECK(max_abs(e.beta - v.coeffs[0].row(i)) < 1e-9);
      }
    }
  }
}

TEST_CASE("projection residuals are orthogonal to the regressors") {
  Stream rng(2, 0);
  const Matrix y = testing::simulate_var(testing::random_stable(rng, 2, 1, 0.7),
                                         testing::random_spd(rng, 2), 300, 3);
  for (int h = 0; h <= 6; ++h) {
    const LpEstimate e = fit_lp(y, h, 2, 1);
    const Vector g = e.design.transpose() * e.residuals;
    CHECK(g.cwiseAbs().maxCoeff() < 1e-8 * (1.0 + max_abs(e.design) * e.residuals.cwiseAbs().maxCoeff() * 300));
    CHECK((e.se.array() > 0.0).all());
  }
}

TEST_CASE("VAR(1) population oracle") {
  const Matrix a{{0.5, 0.2}, {-0.1, 0.6}};
  const Matrix y = testing::simulate_var({a}, Matrix::Identity(2, 2), 20000, 11);
  Matrix pw = a;
  for (int h = 1; h <= 4; ++h) {
    for (Index i = 0; i < 2; ++i) {
      const LpEstimate e = fit_lp(y, h, 1, i);
      CHECK(max_abs(e.beta - pw.row(i)) < 0.05);
    }
    pw = pw * a;
  }
}

TEST_CASE("white noise: coefficients within 3 standard errors") {
  const int reps = 200;
  int inside = 0, total = 0;
  for (int r = 0; r < reps; ++r) {
    Stream rng(300, r);
    const Matrix y = testing::normal_matrix(rng, 400, 2);
    for (int h : {1, 3}) {
      const LpEstimate e = fit_lp(y, h, 1, 0);
      for (Index j = 0; j < 2; ++j) {
        ++total;
        if (std::abs(e.beta(0, j)) <= 3.0 * e.se(0, j)) ++inside;
      }
    }
  }
  CHECK(inside >= 0.95 * total);
}

TEST_CASE("shock-series projection matches the structural IRF") {
  DgpSpec s;
  s.coeffs = {Matrix{{0.5, 0.1, 0.0}, {0.2, 0.3, 0.1}, {0.0, 0.1, 0.4}}};
  s.sigma = Matrix{{1.0, 0.3, 0.2}, {0.3, 1.5, 0.4}, {0.2, 0.4, 2.0}};
  s.T = 20000;
  const SimulatedData sim = simulate(s, 7);
  const VarModel m = fit_var(sim.y, 1, true);
  const ImpulseResponseSet var_irf = irf(identify_recursive(m), 4);
  const int k = 0;
  const Vector shock = sim.shocks.col(k);
  const ImpulseResponseSet lp = lp_irf(sim.y, 4, 1, shock);
  REQUIRE(lp.theta.size() == 5);
  for (int h = 0; h <= 4; ++h) CHECK(max_abs(lp.theta[h] - var_irf.theta[h].col(k)) < 0.1);

  const ImpulseResponseSet lp0 = lp_irf(sim.y, 0, 1, shock);
  CHECK(lp0.theta.size() == 1);
}

TEST_CASE("degenerate impulse") {
  Stream rng(4, 0);
  const Matrix y = testing::normal_matrix(rng, 200, 2);
  try {
    fit_lp(y, 2, 1, 0, Vector(Vector::Zero(200)));
    FAIL("expected SingularRegressors");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularRegressors);
  }
  CHECK_THROWS(fit_lp(y, 2, 1, 0, Vector(Vector::Zero(150))));
}
