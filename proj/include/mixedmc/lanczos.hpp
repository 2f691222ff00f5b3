#pragma once

#include <Eigen/Dense>

namespace mixedmc {

struct PartialEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
  int restarts = 0;
  int matvecs = 0;
};

struct LanczosOptions {
  double tol = 1e-10;  // residual tolerance relative to ||S||_F
  int max_restarts = 200;
  int extra = 10;      // Ritz vectors carried beyond k
  unsigned seed = 12345;
};

/**
 * k algebraically largest eigenpairs of a symmetric matrix by block-started
 * restarted Lanczos with full reorthogonalization (thick restart, residual
 * expansion). Only the lower triangle of `s` is used.
 *
 * Throws NumericalError if the residuals do not reach `tol` within
 * `max_restarts` restarts.
 */
PartialEigen top_eigenpairs(const Eigen::MatrixXd& s, int k, const LanczosOptions& opts = {});

}  // namespace mixedmc
