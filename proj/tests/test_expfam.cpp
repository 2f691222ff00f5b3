#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mixedmc/errors.hpp"
#include "mixedmc/expfam.hpp"
#include "test_util.hpp"

using namespace mixedmc;
using doctest::Approx;

namespace {

std::vector<ExpFamModel> all_models() {
  return {ExpFamModel::gaussian(1.0), ExpFamModel::gaussian(2.5), ExpFamModel::bernoulli(), ExpFamModel::poisson(),
          ExpFamModel::gamma(2.0),    ExpFamModel::negbin(2.0)};
}

double random_theta(const ExpFamModel& m, std::mt19937_64& rng) {
  return m.negative_domain() ? testutil::uniform(-4.0, -0.05, rng) : testutil::uniform(-4.0, 4.0, rng);
}

}  // namespace

TEST_CASE("mean map and curvature match finite differences of the log-partition") {
  std::mt19937_64 rng(7);
  for (const auto& m : all_models()) {
    for (int k = 0; k < 200; ++k) {
      const double t = random_theta(m, rng);
      const double h = 1e-5 * std::max(1.0, std::abs(t));
      const double fd_mean = (m.log_partition(t + h) - m.log_partition(t - h)) / (2 * h);
      const double fd_curv = (m.mean_map(t + h) - m.mean_map(t - h)) / (2 * h);
      CHECK(m.mean_map(t) == Approx(fd_mean).epsilon(1e-6));
      CHECK(m.curvature(t) == Approx(fd_curv).epsilon(1e-6));
      CHECK(m.curvature(t) > 0.0);
    }
  }
}

TEST_CASE("closed-form values") {
  CHECK(ExpFamModel::poisson().mean_map(std::log(3.0)) == Approx(3.0));
  CHECK(ExpFamModel::negbin(2.0).mean_map(std::log(0.5)) == Approx(2.0));
  CHECK(ExpFamModel::gaussian().curvature(17.0) == Approx(1.0));
  CHECK(ExpFamModel::bernoulli().curvature(0.0) == Approx(0.25));
  CHECK(ExpFamModel::poisson().curvature(1.0) == Approx(std::exp(1.0)));
  CHECK(ExpFamModel::poisson().nll_term(2.0, 0.0) == Approx(1.0));
  CHECK(ExpFamModel::gaussian().nll_term(0.0, 3.0) == Approx(4.5));
  CHECK(ExpFamModel::bernoulli().nll_term(1.0, 0.0) == Approx(std::log(2.0)));
  CHECK(ExpFamModel::gamma(2.0).mean_map(-0.5) == Approx(4.0));
  CHECK(ExpFamModel::gaussian(2.0).mean_map(1.5) == Approx(3.0));
}

TEST_CASE("log-partition stays finite far from the origin") {
  CHECK(ExpFamModel::bernoulli().log_partition(800.0) == Approx(800.0));
  CHECK(ExpFamModel::bernoulli().log_partition(-800.0) >= 0.0);
  CHECK(std::isfinite(ExpFamModel::negbin(2.0).log_partition(-1e-12)));
}

TEST_CASE("canonical_from_mean inverts mean_map") {
  std::mt19937_64 rng(3);
  for (const auto& m : all_models()) {
    for (int k = 0; k < 50; ++k) {
      const double t = random_theta(m, rng);
      CHECK(m.canonical_from_mean(m.mean_map(t)) == Approx(t).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(ExpFamModel::bernoulli().canonical_from_mean(1.5), DomainError);
  CHECK_THROWS_AS(ExpFamModel::poisson().canonical_from_mean(0.0), DomainError);
}

TEST_CASE("domain violations raise DomainError") {
  CHECK_THROWS_AS(ExpFamModel::gamma(2.0).log_partition(0.0), DomainError);
  CHECK_THROWS_AS(ExpFamModel::negbin(1.0).mean_map(0.3), DomainError);
  CHECK_THROWS_AS(ExpFamModel::poisson().curvature(std::nan("")), DomainError);
  CHECK_THROWS_AS(ExpFamModel::gamma(-1.0), ConfigError);
  CHECK_THROWS_AS(ExpFamModel::gaussian(0.0), ConfigError);
}

TEST_CASE("bregman divergence is non-negative and vanishes on the diagonal") {
  std::mt19937_64 rng(11);
  for (const auto& m : all_models()) {
    for (int k = 0; k < 100; ++k) {
      const double x = random_theta(m, rng);
      const double y = random_theta(m, rng);
      CHECK(m.bregman(x, y) >= 0.0);
      CHECK(m.bregman(x, x) == Approx(0.0));
    }
  }
  const auto g = ExpFamModel::gaussian(2.0);
  CHECK(g.bregman(3.0, 1.0) == Approx(2.0 * 4.0 / 2.0));
}

TEST_CASE("parse and to_string round-trip") {
  for (const auto& m : all_models()) CHECK(ExpFamModel::parse(m.to_string()) == m);
  CHECK(ExpFamModel::parse("gamma:2.0") == ExpFamModel::gamma(2.0));
  CHECK(ExpFamModel::parse("poisson") == ExpFamModel::poisson());
  CHECK(ExpFamModel::parse("gaussian") == ExpFamModel::gaussian(1.0));
  CHECK_THROWS_AS(ExpFamModel::parse("weibull"), ConfigError);
  CHECK_THROWS_AS(ExpFamModel::parse("gamma"), ConfigError);
  CHECK_THROWS_AS(ExpFamModel::parse("gamma:x"), ConfigError);
  CHECK_THROWS_AS(ExpFamModel::parse("poisson:3"), ConfigError);
}

TEST_CASE("sampler moments") {
  constexpr int n = 100000;
  Rng rng(99);
  const std::vector<std::pair<ExpFamModel, double>> cases{{ExpFamModel::gaussian(2.0), 0.7},
                                                          {ExpFamModel::bernoulli(), -0.4},
                                                          {ExpFamModel::poisson(), 1.2},
                                                          {ExpFamModel::gamma(2.0), -0.5},
                                                          {ExpFamModel::negbin(2.0), std::log(0.6)}};
  for (const auto& [m, t] : cases) {
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = m.sample(t, rng);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double se = std::sqrt(m.curvature(t) / n);
    INFO(m.to_string());
    CHECK(std::abs(mean - m.mean_map(t)) < 4.0 * se);
    CHECK(var == Approx(m.curvature(t)).epsilon(0.05));
  }
}

TEST_CASE("extreme canonical values give degenerate samples") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(ExpFamModel::bernoulli().sample(-50.0, rng) == 0.0);
    CHECK(ExpFamModel::bernoulli().sample(50.0, rng) == 1.0);
    CHECK(ExpFamModel::poisson().sample(-40.0, rng) == 0.0);
  }
}

TEST_CASE("curvature bounds") {
  const auto p = curvature_bounds(ExpFamModel::poisson(), 1.0, 1.0);
  CHECK(p.lower == Approx(std::exp(-2.0)));
  CHECK(p.upper == Approx(std::exp(2.0)));
  const auto g = curvature_bounds(ExpFamModel::gaussian(2.0), 1.0, 1.0);
  CHECK(g.lower == Approx(2.0));
  CHECK(g.upper == Approx(2.0));
  const auto nb = curvature_bounds(ExpFamModel::negbin(1.0), 1.0, 1.0);
  CHECK(nb.lower == Approx(0.181016).epsilon(1e-5));
  const auto b = curvature_bounds(ExpFamModel::bernoulli(), 1.0, 1.0);
  CHECK(b.upper == Approx(0.25));
  const auto ga = curvature_bounds(ExpFamModel::gamma(2.0), 1.0, 1.0, -0.5);
  CHECK(ga.lower == Approx(0.5));
  CHECK(ga.upper == Approx(8.0));
  CHECK_THROWS_AS(curvature_bounds(ExpFamModel::gamma(2.0), 1.0, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(curvature_bounds(ExpFamModel::poisson(), 0.0, 1.0), ConfigError);
}

TEST_CASE("curvature bounds bracket the curvature on the interval") {
  std::mt19937_64 rng(21);
  for (const auto& m : all_models()) {
    const double gamma = 1.5;
    const double K = 2.0;
    const double s = gamma + 1.0 / K;
    const double hi = m.negative_domain() ? -0.1 : s;
    const auto cb = curvature_bounds(m, gamma, K, m.negative_domain() ? std::optional<double>(hi) : std::nullopt);
    for (int k = 0; k < 200; ++k) {
      const double t = testutil::uniform(-s, hi, rng);
      CHECK(m.curvature(t) >= cb.lower * (1 - 1e-12));
      CHECK(m.curvature(t) <= cb.upper * (1 + 1e-12));
    }
  }
}
