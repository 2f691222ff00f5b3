#include "mixedmc/matnorm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mixedmc/errors.hpp"
#include "mixedmc/lanczos.hpp"

namespace mixedmc {

namespace {

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

struct TangentBasis {
  Matrix u;
  Matrix v;
};

TangentBasis tangent_basis(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    while (r < sv.size() && sv[r] > 1e-8 * sv[0]) ++r;
  }
  return {svd.matrixU().leftCols(r), svd.matrixV().leftCols(r)};
}

}  // namespace

EigMode EigMode::parse(const std::string& text) {
  if (text == "full") return full();
  if (text.rfind("trunc:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(text.substr(6), &used);
      if (used == text.size() - 6 && k >= 1) return truncated(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("eigen mode must be 'full' or 'trunc:K' with K >= 1, got '" + text + "'");
}

std::string EigMode::to_string() const { return is_full() ? "full" : "trunc:" + std::to_string(*k); }

int default_truncation(int dim) { return std::max(1, (dim + 9) / 10); }

double frobenius_norm(const Matrix& a) { return a.norm(); }

double operator_norm(const Matrix& a) {
  const Vector sv = singular_values(a);
  return sv.size() ? sv[0] : 0.0;
}

double nuclear_norm(const Matrix& a) { return singular_values(a).sum(); }

double two_to_inf_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.rowwise().norm().maxCoeff();
}

double max_norm_upper(const Matrix& a) { return two_to_inf_norm(a); }

int numerical_rank(const Matrix& a, double rel_tol) {
  const Vector sv = singular_values(a);
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  return static_cast<int>((sv.array() > rel_tol * sv[0]).count());
}

Matrix psd_project(const Matrix& s, const EigMode& mode) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n) throw ConfigError("psd_project: matrix must be square");
  if (n == 0) return s;

  Matrix out;
  if (mode.is_full() || *mode.k >= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success) throw NumericalError("psd_project: eigendecomposition failed");
    const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
    out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  } else {
    const PartialEigen top = top_eigenpairs(s, *mode.k);
    int positive = 0;
    while (positive < top.values.size() && top.values[positive] > 0.0) ++positive;
    const auto v = top.vectors.leftCols(positive);
    out = v * top.values.head(positive).asDiagonal() * v.transpose();
  }
  return 0.5 * (out + out.transpose());
}

Vector linf_prox(const Vector& c, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("linf_prox: beta must be >= 0");
  const Eigen::Index d = c.size();
  if (beta == 0.0 || d == 0) return c;

  const Vector mag = c.cwiseAbs();
  if (mag.sum() <= beta) return Vector::Zero(d);

  std::vector<double> sorted(mag.data(), mag.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Largest entries are pulled down to a common level t; the rest are untouched.
  double t = -1.0;
  double partial = 0.0;
  for (Eigen::Index k = 1; k <= d; ++k) {
    partial += sorted[k - 1];
    const double level = (partial - beta) / static_cast<double>(k);
    const double next = k < d ? sorted[k] : 0.0;
    if (next < level && level <= sorted[k - 1]) {
      t = level;
      break;
    }
  }
  if (t < 0.0) t = std::max(0.0, (mag.sum() - beta) / static_cast<double>(d));

  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double m = std::min(mag[i], t);
    z[i] = c[i] < 0.0 ? -m : m;
  }
  return z;
}

Matrix linf_ball_project(const Matrix& x, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("linf_ball_project: alpha must be > 0");
  return x.cwiseMax(-alpha).cwiseMin(alpha);
}

Vector linf_ball_project(const Vector& x, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("linf_ball_project: alpha must be > 0");
  return x.cwiseMax(-alpha).cwiseMin(alpha);
}

Matrix tangent_project(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("tangent_project: shape mismatch");
  const TangentBasis tb = tangent_basis(a);
  const Matrix pu_b = tb.u * (tb.u.transpose() * b);
  const Matrix b_pv = (b * tb.v) * tb.v.transpose();
  const Matrix pu_b_pv = tb.u * (tb.u.transpose() * b_pv);
  return pu_b + b_pv - pu_b_pv;
}

Matrix tangent_project_perp(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("tangent_project_perp: shape mismatch");
  const TangentBasis tb = tangent_basis(a);
  const Matrix left = b - tb.u * (tb.u.transpose() * b);
  return left - (left * tb.v) * tb.v.transpose();
}

}  // namespace mixedmc
