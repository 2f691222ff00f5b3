#pragma once

#include <optional>

#include "mixedmc/expfam.hpp"
#include "mixedmc/layout.hpp"

namespace mixedmc::theory {

/// Inputs of the tuning rule and recovery bounds. The absolute constants
/// c_abs and C_abs are never instantiated by the theory; they default to 1
/// and every bound is a diagnostic curve rather than a guarantee.
struct BoundInputs {
  int n1 = 1;
  int n2 = 1;
  int rank = 1;
  double p = 1.0;       // lower bound on the observation probabilities
  double gamma = 1.0;   // sup-norm radius of the truth
  double K = 1.0;       // curvature interval constant
  double L_gamma = 1.0; // L_gamma^2 <= G'' (worst case over blocks)
  double U_gamma = 1.0; // G'' <= U_gamma^2 (worst case over blocks)
  double kappa = 1.0;   // lambda_max / lambda_star
  double c_abs = 1.0;
  double C_abs = 1.0;
};

/// Which square-root term enters lambda_star: sqrt(n1 + N2) (the stated
/// rule) or the smaller sqrt(n1 v N2).
enum class LambdaForm { SqrtSum, SqrtMax };

/// 2c (U v K)(sqrt(n1 + N2) + log(n1 v N2)^{3/2}) / (n1 N2).
double lambda_star(const BoundInputs& in, LambdaForm form = LambdaForm::SqrtSum);

/// c (sqrt(mu_term) + sqrt(log(n1 ^ N2))) / (n1 N2). `mu_term` is the leading
/// sampling-dependent term, which the source leaves undefined.
double sigma_r_bound(const BoundInputs& in, double mu_term);

/// 946 gamma^2 log(n1 + N2) / (p n1 D), with D = N2 unless given.
double beta_threshold(const BoundInputs& in, std::optional<double> d = std::nullopt);

/// Right-hand side of the Frobenius recovery bound (p^2 in the denominator):
/// C rank (n1 v N2) / (p^2 n1 N2) (1 + log^3(n1 v N2) / (n1 v N2))
///   ((U v K)^2 (1 + k L^2 + k^2 L^4) / L^4 + gamma^2 (1 + k + k^2)).
double recovery_bound(const BoundInputs& in);

/// Same expression with p in place of p^2 (bound on the Pi-weighted norm).
double weighted_recovery_bound(const BoundInputs& in);

struct SolverPenalties {
  double mu = 0.0;      // trace weight
  double lambda = 0.0;  // diagonal l_inf weight
};

/// Maps (lambda_star, kappa lambda_star), defined for the likelihood
/// normalized by 1/(n1 N2), onto the unnormalized ADMM program:
/// mu = n1 N2 lambda_star / 2 and lambda = n1 N2 kappa lambda_star.
SolverPenalties solver_penalties(const BoundInputs& in, LambdaForm form = LambdaForm::SqrtSum);

/// BoundInputs with curvature bounds aggregated over the layout's blocks
/// (minimum lower bound, maximum upper bound). CurvatureBounds live on the
/// G'' scale, so L_gamma and U_gamma are their square roots.
BoundInputs bound_inputs_for(const ColumnBlockLayout& layout, int rank, double p, double gamma, double K,
                             std::optional<double> negative_upper = std::nullopt);

}  // namespace mixedmc::theory
