#pragma once

#include <vector>

#include "mixedmc/expfam.hpp"
#include "mixedmc/layout.hpp"
#include "mixedmc/matnorm.hpp"

namespace mixedmc {

/**
 * Settings of the ADMM solver for
 *
 *   min_Z  sum_{(i,j) observed} [G(Z12_ij) - Y_ij Z12_ij]
 *          + lambda ||diag(Z)||_inf + mu tr(Z)
 *   s.t.   Z PSD,  |Z12_ij| <= alpha,
 *
 * where Z is the (n1 + N2)-dimensional symmetric embedding whose upper-right
 * block Z12 carries the canonical parameter matrix. The likelihood is the
 * unnormalized sum; see theory::solver_penalties for the mapping from the
 * normalized tuning rule.
 */
struct AdmmConfig {
  double mu = 0.0;
  double lambda = 0.0;
  double alpha = 10.0;
  double rho0 = 0.1;
  double tau = 1.618;
  double tol = 1e-4;
  int max_iter = 2000;
  EigMode eig_mode = EigMode::full();
  bool adapt_rho = true;
  double newton_tol = 1e-10;
  int newton_max = 50;
  int stagnation_window = 20;
  double stagnation_tol = 1e-12;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

inline constexpr double kRhoMin = 1e-6;
inline constexpr double kRhoMax = 1e6;

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

struct TraceRow {
  int iteration = 0;
  Residuals raw;
  Residuals relative;  // raw / (1 + ||Z||_F)
  double rho = 0.0;
};

struct AdmmState {
  Matrix X;
  Matrix Z;
  Matrix W;
  double rho = 0.0;
  int t = 0;
  std::vector<TraceRow> history;
};

struct CompletionResult {
  Matrix theta_hat;
  Matrix completed;
  int iterations = 0;
  Residuals final_raw;
  Residuals final_relative;
  bool converged = false;
  bool stagnated = false;
  std::vector<TraceRow> trace;
};

/// proj_PSD(Z - (W + mu I) / rho).
Matrix x_step(const Matrix& z, const Matrix& w, double mu, double rho, const EigMode& mode);

/// Minimizer of G(z) - y z + rho (z - c)^2 over [-alpha, alpha] intersected
/// with the model's canonical domain (upper end -kDomainGuard for Gamma/NegBin).
double z12_entry_solve(const ExpFamModel& model, double y, double c, double rho, double alpha,
                       double newton_tol = 1e-10, int newton_max = 50);

/// Interval the Z12 entries of a block are confined to.
std::pair<double, double> entry_box(const ExpFamModel& model, double alpha);

/// Z-step from C = X + W / rho: likelihood prox on observed Z12 entries,
/// box projection on unobserved ones, copy of the off-diagonal Z11/Z22
/// entries, and the l_inf prox with beta = lambda / rho on the diagonal.
Matrix z_step(const Matrix& x, const Matrix& w, double rho, const Matrix& y, const ObservationMask& mask,
              const ColumnBlockLayout& layout, const AdmmConfig& config);

/// W + tau rho (X - Z).
Matrix dual_step(const Matrix& w, const Matrix& x, const Matrix& z, double tau, double rho);

/// Primal and dual gaps after an iteration; `w_prev`/`z_prev` are the
/// iterates at the start of it.
Residuals residuals(const Matrix& x, const Matrix& z, const Matrix& z_prev, const Matrix& w_prev,
                    const Matrix& w, double rho);

/// Penalty balancing: 0.7 rho when the primal gap is under half the dual
/// gap, 1.3 rho in the opposite case. Clamped to [kRhoMin, kRhoMax].
double balance_gap(double rho, double primal, double dual);

/// Iteration-level driver; solve() runs it to completion. Exposed so the
/// state can be inspected after each step.
class AdmmSolver {
 public:
  AdmmSolver(Matrix y, ObservationMask mask, ColumnBlockLayout layout, AdmmConfig config);

  /// One X -> Z -> W sweep plus residual bookkeeping and rho balancing.
  void step();
  bool finished() const { return converged_ || stagnated_ || state_.t >= config_.max_iter; }
  const AdmmState& state() const { return state_; }
  CompletionResult result() const;
  CompletionResult run();

 private:
  Matrix y_;
  ObservationMask mask_;
  ColumnBlockLayout layout_;
  AdmmConfig config_;
  AdmmState state_;
  bool converged_ = false;
  bool stagnated_ = false;
  int flat_steps_ = 0;
};

/// Validates the inputs and runs ADMM until the relative gaps fall under
/// config.tol, Z stagnates, or max_iter is reached.
CompletionResult solve(const Matrix& y, const ObservationMask& mask, const ColumnBlockLayout& layout,
                       const AdmmConfig& config);

/// Checks that every observed entry is finite and in its block's support.
void validate_observations(const Matrix& y, const ObservationMask& mask, const ColumnBlockLayout& layout);

}  // namespace mixedmc
