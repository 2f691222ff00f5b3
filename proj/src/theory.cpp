#include "mixedmc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixedmc/errors.hpp"

namespace mixedmc::theory {

namespace {

void check_dims(const BoundInputs& in) {
  if (in.n1 < 1 || in.n2 < 1) throw ConfigError("bound inputs: dimensions must be >= 1");
}

void check_sampling(const BoundInputs& in) {
  if (!(in.p > 0.0 && in.p <= 1.0)) throw ConfigError("bound inputs: p must lie in (0, 1]");
}

double product(const BoundInputs& in) { return static_cast<double>(in.n1) * static_cast<double>(in.n2); }

double recovery_rhs(const BoundInputs& in, double p_power) {
  check_dims(in);
  check_sampling(in);
  if (in.rank < 1) throw ConfigError("bound inputs: rank must be >= 1");
  if (!(in.L_gamma > 0.0) || !(in.U_gamma > 0.0)) throw ConfigError("bound inputs: curvature bounds must be > 0");
  if (!(in.kappa >= 0.0)) throw ConfigError("bound inputs: kappa must be >= 0");
  const double big = std::max(in.n1, in.n2);
  const double uk = std::max(in.U_gamma, in.K);
  const double l2 = in.L_gamma * in.L_gamma;
  const double k = in.kappa;
  const double log_term = 1.0 + std::pow(std::log(big), 3) / big;
  const double curvature_term = uk * uk * (1.0 + k * l2 + k * k * l2 * l2) / (l2 * l2);
  const double box_term = in.gamma * in.gamma * (1.0 + k + k * k);
  return in.C_abs * in.rank * big / (std::pow(in.p, p_power) * product(in)) * log_term *
         (curvature_term + box_term);
}

}  // namespace

double lambda_star(const BoundInputs& in, LambdaForm form) {
  check_dims(in);
  const double uk = std::max(in.U_gamma, in.K);
  const double big = std::max(in.n1, in.n2);
  const double root = form == LambdaForm::SqrtSum ? std::sqrt(static_cast<double>(in.n1) + in.n2) : std::sqrt(big);
  return 2.0 * in.c_abs * uk * (root + std::pow(std::log(big), 1.5)) / product(in);
}

double sigma_r_bound(const BoundInputs& in, double mu_term) {
  check_dims(in);
  if (!(mu_term >= 0.0)) throw ConfigError("sigma_r_bound: mu_term must be >= 0");
  const double small = std::min(in.n1, in.n2);
  return in.c_abs * (std::sqrt(mu_term) + std::sqrt(std::log(small))) / product(in);
}

double beta_threshold(const BoundInputs& in, std::optional<double> d) {
  check_dims(in);
  check_sampling(in);
  const double denom_cols = d.value_or(static_cast<double>(in.n2));
  if (!(denom_cols > 0.0)) throw ConfigError("beta_threshold: D must be > 0");
  return 946.0 * in.gamma * in.gamma * std::log(static_cast<double>(in.n1) + in.n2) /
         (in.p * in.n1 * denom_cols);
}

double recovery_bound(const BoundInputs& in) { return recovery_rhs(in, 2.0); }

double weighted_recovery_bound(const BoundInputs& in) { return recovery_rhs(in, 1.0); }

SolverPenalties solver_penalties(const BoundInputs& in, LambdaForm form) {
  const double ls = lambda_star(in, form) * product(in);
  return {0.5 * ls, in.kappa * ls};
}

BoundInputs bound_inputs_for(const ColumnBlockLayout& layout, int rank, double p, double gamma, double K,
                             std::optional<double> negative_upper) {
  BoundInputs in;
  in.n1 = layout.rows();
  in.n2 = layout.cols();
  in.rank = rank;
  in.p = p;
  in.gamma = gamma;
  in.K = K;
  in.L_gamma = std::numeric_limits<double>::infinity();
  in.U_gamma = 0.0;
  for (const auto& block : layout.blocks()) {
    const CurvatureBounds cb = curvature_bounds(block.model, gamma, K, negative_upper);
    in.L_gamma = std::min(in.L_gamma, std::sqrt(cb.lower));
    in.U_gamma = std::max(in.U_gamma, std::sqrt(cb.upper));
  }
  return in;
}

}  // namespace mixedmc::theory
