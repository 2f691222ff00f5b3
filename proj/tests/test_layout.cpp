#include <doctest.h>

#include <cmath>
#include <string>

#include "mixedmc/errors.hpp"
#include "mixedmc/layout.hpp"

using namespace mixedmc;

TEST_CASE("layout parsing and block lookup") {
  const auto layout = ColumnBlockLayout::parse(
      "# five kinds\n"
      "gaussian:2 3\n"
      "bernoulli 2   # trailing comment\n"
      "\n"
      "gamma:1.5 4\n",
      10);
  CHECK(layout.rows() == 10);
  CHECK(layout.cols() == 9);
  CHECK(layout.num_blocks() == 3);
  CHECK(layout.block_start(2) == 5);
  CHECK(layout.block_end(2) == 9);
  CHECK(layout.block_of(0).index == 0);
  CHECK(layout.block_of(4).index == 1);
  CHECK(layout.block_of(8).model->kind() == Kind::Gamma);
  CHECK(layout.block(0).model == ExpFamModel::gaussian(2.0));
  CHECK_THROWS_AS((void)layout.block_of(9), std::out_of_range);
  CHECK_THROWS_AS((void)layout.block_of(-1), std::out_of_range);

  const auto again = ColumnBlockLayout::parse(layout.to_text(), 10);
  CHECK(again.cols() == layout.cols());
  for (int b = 0; b < layout.num_blocks(); ++b) {
    CHECK(again.block(b).model == layout.block(b).model);
    CHECK(again.block(b).width == layout.block(b).width);
  }
}

TEST_CASE("layout errors name the line") {
  try {
    (void)ColumnBlockLayout::parse("poisson 3\nweibull 2\n", 4);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ColumnBlockLayout::parse("poisson 0\n", 4), ConfigError);
  CHECK_THROWS_AS(ColumnBlockLayout::parse("poisson\n", 4), ConfigError);
  CHECK_THROWS_AS(ColumnBlockLayout::parse("# nothing\n", 4), ConfigError);
  CHECK_THROWS_AS(ColumnBlockLayout(0, {{ExpFamModel::poisson(), 2}}), ConfigError);
}

TEST_CASE("sampling schemes") {
  const auto u = SamplingScheme::uniform(0.3);
  CHECK(u.probability(4, 7) == 0.3);
  CHECK(u.min_probability() == 0.3);
  CHECK_THROWS_AS(SamplingScheme::uniform(0.0), ConfigError);
  CHECK_THROWS_AS(SamplingScheme::uniform(1.5), ConfigError);

  Matrix pi(2, 2);
  pi << 0.5, 1.0, 0.25, 0.75;
  const auto nu = SamplingScheme::non_uniform(pi);
  CHECK(nu.probability(1, 0) == 0.25);
  CHECK(nu.min_probability() == 0.25);
  CHECK_THROWS_AS(nu.check_shape(3, 2), ConfigError);
  pi(0, 0) = 0.0;
  CHECK_THROWS_AS(SamplingScheme::non_uniform(pi), ConfigError);
}

TEST_CASE("masks") {
  Rng rng(1);
  const auto mask = make_mask(SamplingScheme::uniform(0.4), 200, 200, rng);
  const double frac = static_cast<double>(mask.count()) / 40000.0;
  CHECK(std::abs(frac - 0.4) < 4 * std::sqrt(0.24 / 40000.0));

  Rng a(9);
  Rng b(9);
  CHECK((make_mask(SamplingScheme::uniform(0.5), 5, 5, a).observed ==
         make_mask(SamplingScheme::uniform(0.5), 5, 5, b).observed)
            .all());

  Matrix x = Matrix::Constant(2, 3, 4.0);
  auto m = ObservationMask::all(2, 3, false);
  m.observed(1, 2) = true;
  const Matrix y = apply_mask(x, m);
  CHECK(y.sum() == 4.0);
  CHECK(y(1, 2) == 4.0);
  CHECK_THROWS_AS(apply_mask(Matrix::Zero(3, 3), m), ConfigError);
}
