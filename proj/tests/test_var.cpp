#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"
#include "svarkit/errors.hpp"
#include "svarkit/var.hpp"

using namespace svarkit;
using testing::max_abs;
using testing::scalar;

TEST_CASE("fit_var: scalar AR(1) Monte Carlo") {
  int inside = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const Matrix y = testing::simulate_var({scalar(0.5)}, scalar(1.0), 10000, 1000 + r);
    const VarModel m = fit_var(y, 1, true);
    if (std::abs(m.coeffs[0](0, 0) - 0.5) <= 0.02) ++inside;
  }
  CHECK(inside >= 0.95 * reps);
}

TEST_CASE("fit_var: iid data gives small coefficients") {
  for (int r = 0; r < 20; ++r) {
    Stream rng(77, r);
    const Matrix y = testing::normal_matrix(rng, 5000, 2);
    CHECK(max_abs(fit_var(y, 1, true).coeffs[0]) < 0.06);
  }
}

TEST_CASE("fit_var: p = 0 with intercept") {
  Stream rng(3, 0);
  const Matrix y = testing::normal_matrix(rng, 50, 2);
  const VarModel m = fit_var(y, 0, true);
  const Matrix c = y.rowwise() - y.colwise().mean();
  CHECK(max_abs(m.residuals - c) < 1e-12);
  CHECK(max_abs(m.sigma_u - c.transpose() * c / 50.0) < 1e-12);
}

TEST_CASE("fit_var: preconditions") {
  Stream rng(4, 0);
  const Matrix y = testing::normal_matrix(rng, 6, 2);
  try {
    fit_var(y, 3, true);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
  Matrix z = Matrix::Zero(30, 1);
  try {
    fit_var(z, 1, true);
    FAIL("expected SingularRegressors");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularRegressors);
  }
}

TEST_CASE("fit_var invariants") {
  Stream rng(5, 0);
  const auto a = testing::random_stable(rng, 3, 2, 0.8);
  const Matrix y = testing::simulate_var(a, testing::random_spd(rng, 3), 400, 9);
  const VarModel m = fit_var(y, 2, true);

  SUBCASE("normal equations") {
    const Matrix x = lag_design(y, 2, true, 2);
    const Matrix g = x.transpose() * m.residuals;
    CHECK(max_abs(g) < 1e-8 * (1.0 + x.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff()));
    CHECK(max_abs(m.residuals.colwise().mean()) < 1e-10);
  }
  SUBCASE("sigma divisor") {
    CHECK(max_abs(m.sigma_u - m.residuals.transpose() * m.residuals / 398.0) < 1e-12);
    CHECK(max_abs(m.sigma_u - m.sigma_u.transpose()) == 0.0);
  }
  SUBCASE("equivariance under y -> M y") {
    const Matrix mm = testing::normal_matrix(rng, 3, 3) + 2.0 * Matrix::Identity(3, 3);
    const VarModel t = fit_var(Matrix(y * mm.transpose()), 2, true);
    for (int j = 0; j < 2; ++j)
      CHECK(max_abs(t.coeffs[j] - mm * m.coeffs[j] * mm.inverse()) < 1e-8);
  }
}

TEST_CASE("companion examples") {
  const VarModel m1 = make_var({Matrix{{0.5, 0.1}, {0.2, 0.3}}}, Matrix::Identity(2, 2));
  CHECK(companion(m1).matrix == m1.coeffs[0]);

  const VarModel m2 = make_var({scalar(0.3), scalar(0.2)}, scalar(1.0));
  const Matrix expected{{0.3, 0.2}, {1.0, 0.0}};
  CHECK(companion(m2).matrix == expected);

  const VarModel z = make_var({Matrix::Zero(2, 2), Matrix::Zero(2, 2)}, Matrix::Identity(2, 2));
  const auto cz = companion(z);
  CHECK(cz.spectral_radius == 0.0);

  const VarModel p0 = make_var({}, scalar(1.0));
  try {
    companion(p0);
    FAIL("expected InvalidOrder");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidOrder);
  }
}

TEST_CASE("stability examples") {
  auto s = check_stability(make_var({scalar(0.5)}, scalar(1.0)));
  CHECK(s.stable);
  CHECK(s.spectral_radius == doctest::Approx(0.5));
  s = check_stability(make_var({scalar(1.0)}, scalar(1.0)));
  CHECK_FALSE(s.stable);
  CHECK(s.boundary);
  s = check_stability(make_var({scalar(0.5), scalar(0.5)}, scalar(1.0)));
  CHECK_FALSE(s.stable);
  CHECK(s.spectral_radius == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stability invariant to variable reordering") {
  Stream rng(8, 0);
  for (int r = 0; r < 50; ++r) {
    const auto a = testing::random_stable(rng, 3, 2, 0.5 + 0.01 * r);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
    perm.indices() << 2, 0, 1;
    std::vector<Matrix> b;
    for (const Matrix& m : a) b.push_back(perm * m * perm.transpose());
    const auto s1 = check_stability(make_var(a, Matrix::Identity(3, 3)));
    const auto s2 = check_stability(make_var(b, Matrix::Identity(3, 3)));
    CHECK(s1.stable == s2.stable);
    CHECK(s1.spectral_radius == doctest::Approx(s2.spectral_radius).epsilon(1e-10));
  }
}

TEST_CASE("MA coefficients") {
  Stream rng(9, 0);
  const auto a = testing::random_stable(rng, 3, 1, 0.9);
  const auto phi = ma_coefficients(make_var(a, Matrix::Identity(3, 3)), 10);
  CHECK(phi[0] == Matrix::Identity(3, 3));
  Matrix pw = Matrix::Identity(3, 3);
  for (int h = 1; h <= 10; ++h) {
    pw = pw * a[0];
    CHECK(max_abs(phi[h] - pw) < 1e-13);
  }
  const auto zero = ma_coefficients(make_var({Matrix::Zero(2, 2)}, Matrix::Identity(2, 2)), 5);
  for (int h = 1; h <= 5; ++h) CHECK(zero[h].isZero(0.0));

  const auto a3 = testing::random_stable(rng, 2, 3, 0.9);
  const auto phi3 = ma_coefficients(make_var(a3, Matrix::Identity(2, 2)), 15);
  const Matrix c = companion_matrix(a3);
  Matrix cp = Matrix::Identity(6, 6);
  for (int h = 0; h <= 15; ++h) {
    CHECK(max_abs(phi3[h] - cp.topLeftCorner(2, 2)) < 1e-12);
    cp = cp * c;
  }
}

TEST_CASE("asymptotic covariance") {
  SUBCASE("white noise scalar") {
    Stream rng(10, 0);
    const Matrix y = testing::normal_matrix(rng, 10000, 1);
    const Matrix v = asymptotic_cov(fit_var(y, 1, true));
    CHECK(std::abs(v(0, 0) - 1.0) < 0.1);
  }
  SUBCASE("Kronecker structure and symmetry") {
    Stream rng(12, 0);
    const auto a = testing::random_stable(rng, 2, 2, 0.7);
    const Matrix y = testing::simulate_var(a, testing::random_spd(rng, 2), 500, 3);
    const VarModel m = fit_var(y, 2, false);
    const Matrix v = asymptotic_cov(m);
    const Matrix gi = m.gamma.inverse();
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j)
        CHECK(max_abs(v.block(2 * i, 2 * j, 2, 2) - gi(i, j) * m.sigma_u) < 1e-12);
    CHECK(max_abs(v - v.transpose()) < 1e-12);
  }
}

TEST_CASE("iterated forecasts") {
  const Matrix f = forecast_iterated(make_var({scalar(0.5)}, scalar(1.0)), scalar(2.0), 3);
  CHECK(f(0, 0) == 1.0);
  CHECK(f(1, 0) == 0.5);
  CHECK(f(2, 0) == 0.25);

  Vector nu(2);
  nu << 1.5, -0.5;
  const Matrix g = forecast_iterated(make_var({Matrix::Zero(2, 2)}, Matrix::Identity(2, 2), nu),
                                     Matrix::Ones(1, 2), 4);
  for (Index h = 0; h < 4; ++h) CHECK(g.row(h) == nu.transpose());

  // scalar p = 2 against the companion recursion
  const VarModel m = make_var({scalar(0.6), scalar(-0.2)}, scalar(1.0));
  Matrix last(2, 1);
  last << 1.0, 3.0;  // oldest first
  const Matrix fc = forecast_iterated(m, last, 6);
  const Matrix c = companion(m).matrix;
  Vector state(2);
  state << 3.0, 1.0;
  for (Index h = 0; h < 6; ++h) {
    state = c * state;
    CHECK(fc(h, 0) == doctest::Approx(state(0)).epsilon(1e-14));
  }
  CHECK_THROWS(forecast_iterated(m, Matrix::Ones(1, 1), 2));
}

TEST_CASE("granger wald") {
  SUBCASE("exactly zero coefficients") {
    Stream rng(13, 0);
    const Matrix y = testing::normal_matrix(rng, 300, 2);
    VarModel m = fit_var(y, 2, true);
    m.coeffs[0](0, 1) = 0.0;
    m.coeffs[1](0, 1) = 0.0;
    const int cause[] = {1};
    const int effect[] = {0};
    const TestResult r = granger_wald(m, cause, effect);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.df == 2);
  }
  SUBCASE("size and power") {
    const int reps = 500;
    int rej0 = 0, rej1 = 0;
    for (int r = 0; r < reps; ++r) {
      const Matrix a0{{0.5, 0.0}, {0.3, 0.4}};
      const Matrix a1{{0.5, 0.8}, {0.0, 0.4}};
      const int cause[] = {1};
      const int effect[] = {0};
      const Matrix y0 = testing::simulate_var({a0}, Matrix::Identity(2, 2), 2000, 5000 + r);
      const Matrix y1 = testing::simulate_var({a1}, Matrix::Identity(2, 2), 2000, 9000 + r);
      if (granger_wald(fit_var(y0, 1, true), cause, effect).p_value < 0.05) ++rej0;
      if (granger_wald(fit_var(y1, 1, true), cause, effect).p_value < 0.05) ++rej1;
    }
    const double size = double(rej0) / reps;
    CHECK(size >= 0.02);
    CHECK(size <= 0.09);
    CHECK(double(rej1) / reps >= 0.95);
  }
  SUBCASE("selection errors") {
    Stream rng(14, 0);
    const VarModel m = fit_var(testing::normal_matrix(rng, 100, 2), 1, true);
    const int none[] = {0};
    std::span<const int> empty;
    CHECK_THROWS(granger_wald(m, empty, none));
    CHECK_THROWS(granger_wald(m, none, none));
  }
}
