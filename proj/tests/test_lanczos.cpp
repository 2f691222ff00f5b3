#include <doctest.h>

#include <random>

#include "mixedmc/lanczos.hpp"
#include "test_util.hpp"

using namespace mixedmc;

namespace {

void check_against_dense(const Matrix& s, int k) {
  const PartialEigen pe = top_eigenpairs(s, k);
  Eigen::SelfAdjointEigenSolver<Matrix> dense(s);
  const Vector all = dense.eigenvalues().reverse();
  REQUIRE(pe.values.size() == k);
  for (int i = 0; i < k; ++i) CHECK(std::abs(pe.values(i) - all(i)) <= 1e-8 * (1 + s.norm()));
  const Matrix gram = pe.vectors.transpose() * pe.vectors;
  CHECK((gram - Matrix::Identity(k, k)).norm() < 1e-8);
  for (int i = 0; i < k; ++i) {
    CHECK((s * pe.vectors.col(i) - pe.values(i) * pe.vectors.col(i)).norm() <= 1e-7 * (1 + s.norm()));
  }
}

}  // namespace

TEST_CASE("leading eigenpairs of random symmetric matrices") {
  std::mt19937_64 rng(1);
  for (int n : {5, 30, 80, 150}) {
    const Matrix s = testutil::symmetric_matrix(n, rng);
    for (int k : {1, 3, n / 4 + 1}) check_against_dense(s, std::min(k, n));
  }
}

TEST_CASE("clustered and repeated eigenvalues") {
  std::mt19937_64 rng(2);
  const int n = 60;
  Eigen::HouseholderQR<Matrix> qr(testutil::gaussian_matrix(n, n, rng));
  const Matrix q = qr.householderQ();
  Vector d = Vector::LinSpaced(n, -1.0, 1.0);
  d.head(4).setConstant(5.0);
  d(4) = 5.0 - 1e-9;
  const Matrix s = q * d.asDiagonal() * q.transpose();
  const PartialEigen pe = top_eigenpairs(s, 5);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(pe.values(i) - 5.0) < 1e-8);
}

TEST_CASE("low-rank plus negative definite") {
  std::mt19937_64 rng(3);
  const Matrix u = testutil::gaussian_matrix(100, 4, rng);
  const Matrix s = u * u.transpose() - 0.5 * Matrix::Identity(100, 100);
  check_against_dense(s, 6);
}

TEST_CASE("k equal to the dimension") {
  std::mt19937_64 rng(4);
  check_against_dense(testutil::symmetric_matrix(12, rng), 12);
}

TEST_CASE("deterministic for a fixed seed") {
  std::mt19937_64 rng(5);
  const Matrix s = testutil::symmetric_matrix(70, rng);
  const PartialEigen a = top_eigenpairs(s, 7);
  const PartialEigen b = top_eigenpairs(s, 7);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
}
