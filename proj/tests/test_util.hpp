#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mixedmc/matnorm.hpp"

namespace testutil {

inline mixedmc::Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  mixedmc::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline mixedmc::Matrix low_rank_matrix(int rows, int cols, int rank, std::mt19937_64& rng) {
  return gaussian_matrix(rows, rank, rng) * gaussian_matrix(cols, rank, rng).transpose();
}

inline mixedmc::Matrix symmetric_matrix(int n, std::mt19937_64& rng) {
  const mixedmc::Matrix a = gaussian_matrix(n, n, rng);
  return 0.5 * (a + a.transpose());
}

inline double uniform(double lo, double hi, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Minimizer of a convex function on [a, b] by golden-section search.
template <class F>
double golden_min(F f, double a, double b, double tol = 1e-12) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace testutil
