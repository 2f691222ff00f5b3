#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace mixedmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Full eigendecomposition, or the k algebraically largest eigenpairs.
struct EigMode {
  std::optional<int> k;

  static EigMode full() { return {}; }
  static EigMode truncated(int k) { return {k}; }
  bool is_full() const { return !k.has_value(); }

  /// "full" or "trunc:K".
  static EigMode parse(const std::string& text);
  std::string to_string() const;
};

/// Default truncation size: ceil(dim / 10).
int default_truncation(int dim);

double frobenius_norm(const Matrix& a);
double operator_norm(const Matrix& a);
double nuclear_norm(const Matrix& a);
/// Maximum row Euclidean norm.
double two_to_inf_norm(const Matrix& a);
/// Upper bound on the max norm, ||A||_max <= ||A||_{2->inf}. The exact max
/// norm is an SDP and is not computed.
double max_norm_upper(const Matrix& a);
/// Number of singular values above rel_tol * sigma_max.
int numerical_rank(const Matrix& a, double rel_tol = 1e-8);

/// Nearest PSD matrix (Full) or the PSD reconstruction from the leading
/// eigenpairs (Truncated). Only the lower triangle of `s` is read; the
/// result is exactly symmetric.
Matrix psd_project(const Matrix& s, const EigMode& mode);

/// argmin_z beta ||z||_inf + 0.5 ||c - z||_2^2 for arbitrary-sign c.
Vector linf_prox(const Vector& c, double beta);

/// Entrywise clamp to [-alpha, alpha].
Matrix linf_ball_project(const Matrix& x, double alpha);
Vector linf_ball_project(const Vector& x, double alpha);

/// Orthogonal projections onto the tangent space of the rank-r manifold at A
/// and onto its complement. Rank uses singular values > 1e-8 sigma_max.
Matrix tangent_project(const Matrix& a, const Matrix& b);
Matrix tangent_project_perp(const Matrix& a, const Matrix& b);

}  // namespace mixedmc
