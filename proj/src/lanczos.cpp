#include "mixedmc/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mixedmc/errors.hpp"

namespace mixedmc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Classical Gram-Schmidt, applied twice. Returns the remaining norm.
double orthogonalize(VectorXd& q, const MatrixXd& basis, int cols) {
  if (cols == 0) return q.norm();
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd coeff = basis.leftCols(cols).transpose() * q;
    q.noalias() -= basis.leftCols(cols) * coeff;
  }
  return q.norm();
}

PartialEigen dense_top(const MatrixXd& s, int k) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const int n = static_cast<int>(s.rows());
  PartialEigen out;
  out.values = eig.eigenvalues().tail(k).reverse();
  out.vectors = eig.eigenvectors().rightCols(k).rowwise().reverse();
  out.matvecs = n;
  return out;
}

}  // namespace

PartialEigen top_eigenpairs(const MatrixXd& s, int k, const LanczosOptions& opts) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) throw ConfigError("top_eigenpairs: matrix must be square");
  if (k < 1 || k > n) throw ConfigError("top_eigenpairs: need 1 <= k <= dim");
  if (k == n || n <= 2) return dense_top(s, k);

  const MatrixXd full = s.selfadjointView<Eigen::Lower>();
  const double scale = std::max(full.norm(), std::numeric_limits<double>::min());
  const int m = std::min(n, std::max(2 * k + opts.extra, k + 20));
  const int keep = std::min(k + opts.extra, m - 1);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const auto random_vector = [&] {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };

  MatrixXd basis(n, m);
  MatrixXd image(n, m);
  int cols = 0;
  int matvecs = 0;
  // Block start: a single start vector sees one direction per eigenspace,
  // so repeated eigenvalues among the top k would be missed.
  const int block = std::min(k, m / 2);
  int source = 0;  // column whose image extends the basis next

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    while (cols < m) {
      const bool fresh = restart == 0 && cols < block;
      VectorXd next = fresh ? random_vector() : VectorXd(image.col(source++));
      double before = next.norm();
      double norm = orthogonalize(next, basis, cols);
      int retries = 0;
      while (!(norm > 1e-10 * before)) {
        // Invariant subspace found; continue with a fresh direction.
        next = random_vector();
        before = next.norm();
        norm = orthogonalize(next, basis, cols);
        if (++retries > 5) throw NumericalError("top_eigenpairs: cannot extend Krylov basis");
      }
      basis.col(cols) = next / norm;
      image.col(cols).noalias() = full * basis.col(cols);
      ++matvecs;
      ++cols;
    }

    MatrixXd h = basis.leftCols(cols).transpose() * image.leftCols(cols);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(h);
    if (ritz.info() != Eigen::Success) throw NumericalError("top_eigenpairs: Rayleigh-Ritz failed");

    const int wanted = (cols == n) ? k : keep;
    const VectorXd theta = ritz.eigenvalues().tail(wanted).reverse();
    const MatrixXd y = ritz.eigenvectors().rightCols(wanted).rowwise().reverse();
    MatrixXd ritz_vectors = basis.leftCols(cols) * y;
    MatrixXd ritz_images = image.leftCols(cols) * y;

    double worst = 0.0;
    for (int i = 0; i < k; ++i) worst = std::max(worst, (ritz_images.col(i) - theta[i] * ritz_vectors.col(i)).norm());
    if (worst <= opts.tol * scale || cols == n) {
      PartialEigen out;
      out.values = theta.head(k);
      out.vectors = ritz_vectors.leftCols(k);
      out.restarts = restart;
      out.matvecs = matvecs;
      return out;
    }

    basis.leftCols(wanted) = ritz_vectors;
    image.leftCols(wanted) = ritz_images;
    source = 0;
    cols = wanted;
  }
  throw NumericalError("top_eigenpairs: no convergence after " + std::to_string(opts.max_restarts) +
                       " restarts (k=" + std::to_string(k) + ", dim=" + std::to_string(n) + ")");
}

}  // namespace mixedmc
