#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mixedmc/errors.hpp"
#include "mixedmc/solver.hpp"
#include "test_util.hpp"

using namespace mixedmc;
using doctest::Approx;

namespace {

double min_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Proximal gradient on the equivalent problem
//   min_T  sum_obs (s2 T^2 / 2 - Y T) + 2 mu ||T||_*
// (min trace of a PSD completion of T is 2 ||T||_*), valid when lambda = 0
// and the box is inactive.
Matrix prox_gradient(const Matrix& y, const ObservationMask& mask, double s2, double mu, int iters) {
  const double step = 1.0 / s2;
  Matrix t = Matrix::Zero(y.rows(), y.cols());
  Matrix prev = t;
  double momentum = 1.0;
  for (int k = 0; k < iters; ++k) {
    // FISTA extrapolation
    const double next_m = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const Matrix v = t + ((momentum - 1.0) / next_m) * (t - prev);
    momentum = next_m;
    const Matrix grad = mask.observed.select(s2 * v - y, Matrix::Zero(y.rows(), y.cols()));
    Eigen::JacobiSVD<Matrix> svd(v - step * grad, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = (svd.singularValues().array() - 2.0 * mu * step).max(0.0).matrix();
    prev = t;
    t = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  }
  return t;
}

double gaussian_objective(const Matrix& t, const Matrix& y, const ObservationMask& mask, double s2, double mu) {
  double f = 0.0;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (mask(i, j)) f += 0.5 * s2 * t(i, j) * t(i, j) - y(i, j) * t(i, j);
  return f + 2.0 * mu * nuclear_norm(t);
}

}  // namespace

TEST_CASE("x_step is the PSD projection of Z - (W + mu I) / rho") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const Matrix z = testutil::symmetric_matrix(n, rng);
    const Matrix w = testutil::symmetric_matrix(n, rng);
    const double mu = testutil::uniform(0.0, 2.0, rng);
    const double rho = testutil::uniform(0.1, 3.0, rng);
    const Matrix x = x_step(z, w, mu, rho, EigMode::full());
    Matrix target = z - w / rho;
    target.diagonal().array() -= mu / rho;
    // Moreau: X PSD, X - T PSD, <X, X - T> = 0.
    CHECK(min_eig(x) >= -1e-10);
    CHECK(min_eig(x - target) >= -1e-10);
    CHECK(std::abs((x.array() * (x - target).array()).sum()) <= 1e-9 * (1.0 + x.squaredNorm()));
  }
  const Matrix psd = Matrix::Identity(4, 4) * 2.0;
  CHECK((x_step(psd, Matrix::Zero(4, 4), 0.0, 1.0, EigMode::full()) - psd).norm() <= 1e-12);
  CHECK(x_step(psd, Matrix::Zero(4, 4), 5.0, 1.0, EigMode::full()).norm() <= 1e-12);
  CHECK_THROWS_AS(x_step(psd, Matrix::Zero(3, 3), 0.0, 1.0, EigMode::full()), ConfigError);
}

TEST_CASE("z12 entry prox examples") {
  CHECK(z12_entry_solve(ExpFamModel::gaussian(), 1.0, 0.0, 0.5, 10.0) == Approx(0.5));
  CHECK(z12_entry_solve(ExpFamModel::gaussian(4.0), 2.0, 1.0, 1.0, 10.0) == Approx(4.0 / 6.0));
  CHECK(z12_entry_solve(ExpFamModel::gaussian(), 100.0, 0.0, 0.5, 10.0) == 10.0);
  // e^z + 0.2 (z - 5) vanishes at z = 0
  CHECK(z12_entry_solve(ExpFamModel::poisson(), 0.0, 5.0, 0.1, 10.0) == Approx(0.0).epsilon(1e-9));
  CHECK(z12_entry_solve(ExpFamModel::gamma(2.0), 1.0, 5.0, 1.0, 10.0) < 0.0);
  CHECK_THROWS_AS(z12_entry_solve(ExpFamModel::poisson(), 0.0, 0.0, 0.0, 10.0), ConfigError);
}

TEST_CASE("z12 entry prox matches a golden-section oracle") {
  std::mt19937_64 rng(11);
  const std::vector<ExpFamModel> models{ExpFamModel::gaussian(2.0), ExpFamModel::bernoulli(),
                                        ExpFamModel::poisson(), ExpFamModel::gamma(1.5), ExpFamModel::negbin(3.0)};
  for (const auto& model : models) {
    for (int trial = 0; trial < 200; ++trial) {
      double y = 0.0;
      switch (model.kind()) {
        case Kind::Gaussian: y = testutil::uniform(-5, 5, rng); break;
        case Kind::Bernoulli: y = trial % 2; break;
        case Kind::Poisson:
        case Kind::NegBin: y = std::floor(testutil::uniform(0, 20, rng)); break;
        case Kind::Gamma: y = testutil::uniform(0.01, 10, rng); break;
      }
      const double c = testutil::uniform(-12, 12, rng);
      const double rho = std::exp(testutil::uniform(-4, 3, rng));
      const double alpha = 8.0;
      const auto [lo, hi] = entry_box(model, alpha);
      const auto f = [&](double z) { return model.nll_term(y, z) + rho * (z - c) * (z - c); };
      const double oracle = testutil::golden_min(f, lo, hi, 1e-13);
      const double z = z12_entry_solve(model, y, c, rho, alpha);
      CAPTURE(model.to_string());
      CAPTURE(y);
      CAPTURE(c);
      CAPTURE(rho);
      CHECK(z >= lo);
      CHECK(z <= hi);
      CHECK(f(z) <= f(oracle) + 1e-9 * (1.0 + std::abs(f(oracle))));
    }
  }
}

TEST_CASE("z_step") {
  std::mt19937_64 rng(5);
  const ColumnBlockLayout layout(4, {{ExpFamModel::gaussian(), 2}, {ExpFamModel::poisson(), 2},
                                     {ExpFamModel::gamma(2.0), 1}});
  const int n1 = 4;
  const int d = 9;
  const Matrix x = testutil::symmetric_matrix(d, rng) * 3.0;
  const Matrix w = testutil::symmetric_matrix(d, rng);
  const double rho = 0.7;
  Matrix y = Matrix::Zero(4, 5);
  y.leftCols(2) = testutil::gaussian_matrix(4, 2, rng);
  y.col(2).setConstant(3.0);
  y.col(4).setConstant(0.5);
  Rng mrng(2);
  const auto mask = make_mask(SamplingScheme::uniform(0.5), 4, 5, mrng);
  AdmmConfig cfg;
  cfg.lambda = 0.4;
  cfg.alpha = 2.0;
  const Matrix z = z_step(x, w, rho, y, mask, layout, cfg);
  const Matrix c = x + w / rho;

  CHECK((z - z.transpose()).norm() == 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const bool z12 = (i < n1) != (j < n1);
      if (i == j || z12) continue;
      CHECK(z(i, j) == Approx(c(i, j)));
    }
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < 5; ++j) {
      const ExpFamModel& model = *layout.block_of(j).model;
      const auto [lo, hi] = entry_box(model, cfg.alpha);
      const double expected = mask(i, j) ? z12_entry_solve(model, y(i, j), c(i, n1 + j), rho, cfg.alpha)
                                         : std::clamp(c(i, n1 + j), lo, hi);
      CHECK(z(i, n1 + j) == Approx(expected));
    }
  const Vector diag = c.diagonal();
  CHECK((z.diagonal() - linf_prox(diag, cfg.lambda / rho)).norm() <= 1e-12);
  CHECK_THROWS_AS(z_step(Matrix::Zero(3, 3), w, rho, y, mask, layout, cfg), ConfigError);
}

TEST_CASE("dual step and residuals") {
  std::mt19937_64 rng(8);
  const Matrix w = testutil::symmetric_matrix(5, rng);
  const Matrix x = testutil::symmetric_matrix(5, rng);
  const Matrix z = testutil::symmetric_matrix(5, rng);
  const Matrix zp = testutil::symmetric_matrix(5, rng);
  CHECK((dual_step(w, x, z, 1.5, 2.0) - (w + 3.0 * (x - z))).norm() <= 1e-12);

  // tau = 1 makes the Z-gap vanish, leaving rho ||Z_prev - Z||.
  const Matrix w1 = dual_step(w, x, z, 1.0, 2.0);
  const Residuals r = residuals(x, z, zp, w, w1, 2.0);
  CHECK(r.primal == Approx((x - z).norm()));
  CHECK(r.dual == Approx(2.0 * (zp - z).norm()));
  const Residuals fixed = residuals(z, z, z, w, w, 2.0);
  CHECK(fixed.primal == 0.0);
  CHECK(fixed.dual == 0.0);
}

TEST_CASE("balance_gap") {
  CHECK(balance_gap(1.0, 1.0, 3.0) == Approx(0.7));
  CHECK(balance_gap(1.0, 3.0, 1.0) == Approx(1.3));
  CHECK(balance_gap(1.0, 1.0, 1.5) == 1.0);
  CHECK(balance_gap(1e-6, 0.0, 1.0) == kRhoMin);
  CHECK(balance_gap(1e6, 1.0, 0.0) == kRhoMax);
}

TEST_CASE("config and observation validation") {
  AdmmConfig bad;
  bad.mu = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.tau = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.eig_mode = EigMode::truncated(0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const ColumnBlockLayout layout(2, {{ExpFamModel::bernoulli(), 1}, {ExpFamModel::gamma(2.0), 1}});
  Matrix y(2, 2);
  y << 1, 2, 0, 0.5;
  const auto all = ObservationMask::all(2, 2, true);
  CHECK_NOTHROW(validate_observations(y, all, layout));
  y(0, 0) = 0.5;
  CHECK_THROWS_AS(validate_observations(y, all, layout), ConfigError);
  y(0, 0) = 1.0;
  y(1, 1) = -1.0;
  CHECK_THROWS_AS(validate_observations(y, all, layout), ConfigError);
  CHECK_THROWS_AS(validate_observations(y, ObservationMask::all(2, 2, false), layout), ConfigError);
  CHECK_THROWS_AS(validate_observations(Matrix::Zero(3, 2), all, layout), ConfigError);
}

TEST_CASE("fully observed Gaussian without penalties reproduces the data") {
  std::mt19937_64 rng(4);
  const ColumnBlockLayout layout(6, {{ExpFamModel::gaussian(), 5}});
  const Matrix y = testutil::gaussian_matrix(6, 5, rng);
  AdmmConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iter = 5000;
  const auto res = solve(y, ObservationMask::all(6, 5, true), layout, cfg);
  CHECK(res.converged);
  CHECK((res.theta_hat - y).norm() <= 1e-5 * y.norm());
  CHECK((res.completed - y).norm() <= 1e-5 * y.norm());
}

TEST_CASE("rank-one Gaussian completion") {
  std::mt19937_64 rng(12);
  const int n = 20;
  Matrix theta = testutil::low_rank_matrix(n, n, 1, rng);
  theta /= theta.cwiseAbs().maxCoeff();
  const ColumnBlockLayout layout(n, {{ExpFamModel::gaussian(), n}});
  Rng mrng(1);
  const auto mask = make_mask(SamplingScheme::uniform(0.6), n, n, mrng);
  AdmmConfig cfg;
  cfg.mu = 0.01;
  cfg.tol = 1e-6;
  cfg.max_iter = 5000;
  const auto res = solve(apply_mask(theta, mask), mask, layout, cfg);
  CHECK((res.theta_hat - theta).norm() / theta.norm() <= 0.1);
}

TEST_CASE("ADMM optimum agrees with proximal gradient") {
  std::mt19937_64 rng(21);
  const int n1 = 12;
  const int n2 = 10;
  const double s2 = 1.5;
  const Matrix theta = testutil::low_rank_matrix(n1, n2, 2, rng) * 0.5;
  Matrix y = s2 * theta + testutil::gaussian_matrix(n1, n2, rng) * 0.3;
  Rng mrng(3);
  const auto mask = make_mask(SamplingScheme::uniform(0.7), n1, n2, mrng);
  y = apply_mask(y, mask);
  const double mu = 0.8;

  const ColumnBlockLayout layout(n1, {{ExpFamModel::gaussian(s2), n2}});
  AdmmConfig cfg;
  cfg.mu = mu;
  cfg.alpha = 50.0;
  cfg.tol = 1e-9;
  cfg.max_iter = 20000;
  const auto res = solve(y, mask, layout, cfg);
  const Matrix oracle = prox_gradient(y, mask, s2, mu, 20000);

  const double f_admm = gaussian_objective(res.theta_hat, y, mask, s2, mu);
  const double f_oracle = gaussian_objective(oracle, y, mask, s2, mu);
  CHECK(f_admm == Approx(f_oracle).epsilon(1e-6));
  CHECK((res.theta_hat - oracle).norm() <= 1e-3 * (1.0 + oracle.norm()));
}

TEST_CASE("per-iteration invariants and determinism") {
  std::mt19937_64 rng(30);
  const ColumnBlockLayout layout(8, {{ExpFamModel::poisson(), 3}, {ExpFamModel::negbin(2.0), 3}});
  Matrix y(8, 6);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) y(i, j) = std::floor(testutil::uniform(0, 6, rng));
  Rng mrng(7);
  const auto mask = make_mask(SamplingScheme::uniform(0.7), 8, 6, mrng);
  AdmmConfig cfg;
  cfg.mu = 0.5;
  cfg.lambda = 1.0;
  cfg.alpha = 3.0;
  cfg.max_iter = 40;
  cfg.tol = 1e-12;

  AdmmSolver solver(y, mask, layout, cfg);
  while (!solver.finished()) {
    solver.step();
    const AdmmState& s = solver.state();
    CHECK(min_eig(s.X) >= -1e-9 * (1.0 + s.X.norm()));
    CHECK((s.Z - s.Z.transpose()).norm() == 0.0);
    CHECK(s.Z.topRightCorner(8, 6).cwiseAbs().maxCoeff() <= cfg.alpha);
    CHECK(s.Z.topRightCorner(8, 6).rightCols(3).maxCoeff() <= -kDomainGuard);
    CHECK(s.rho >= kRhoMin);
    CHECK(s.rho <= kRhoMax);
  }
  const auto a = solver.result();
  CHECK(a.iterations == 40);
  CHECK(a.trace.size() == 40u);
  const auto b = solve(y, mask, layout, cfg);
  CHECK((a.theta_hat.array() == b.theta_hat.array()).all());
  CHECK(a.final_raw.primal == b.final_raw.primal);
}
