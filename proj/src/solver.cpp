#include "mixedmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixedmc/errors.hpp"

namespace mixedmc {

void AdmmConfig::validate() const {
  const auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(mu >= 0.0 && std::isfinite(mu), "mu must be >= 0");
  need(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
  need(alpha > kDomainGuard && std::isfinite(alpha), "alpha must be > 0");
  need(rho0 > 0.0 && std::isfinite(rho0), "rho0 must be > 0");
  need(tau > 0.0 && tau < 0.5 * (1.0 + std::sqrt(5.0)), "tau must lie in (0, (1 + sqrt 5) / 2)");
  need(tol > 0.0, "tol must be > 0");
  need(max_iter >= 1, "max_iter must be >= 1");
  need(eig_mode.is_full() || *eig_mode.k >= 1, "truncated eigen mode needs k >= 1");
  need(newton_tol > 0.0, "newton_tol must be > 0");
  need(newton_max >= 1, "newton_max must be >= 1");
  need(stagnation_window >= 1, "stagnation_window must be >= 1");
}

Matrix x_step(const Matrix& z, const Matrix& w, double mu, double rho, const EigMode& mode) {
  if (z.rows() != w.rows() || z.cols() != w.cols()) throw ConfigError("x_step: shape mismatch");
  Matrix target = z - w / rho;
  target.diagonal().array() -= mu / rho;
  return psd_project(target, mode);
}

std::pair<double, double> entry_box(const ExpFamModel& model, double alpha) {
  const double hi = std::min(alpha, model.upper_limit());
  if (!(hi > -alpha)) throw ConfigError("alpha too small for the canonical domain of " + model.to_string());
  return {-alpha, hi};
}

double z12_entry_solve(const ExpFamModel& model, double y, double c, double rho, double alpha,
                       double newton_tol, int newton_max) {
  if (!(rho > 0.0)) throw ConfigError("z12_entry_solve: rho must be > 0");
  const auto [lo, hi] = entry_box(model, alpha);

  if (model.kind() == Kind::Gaussian) {
    const double z = (y + 2.0 * rho * c) / (model.nuisance() + 2.0 * rho);
    return std::clamp(z, lo, hi);
  }

  // g'(z) = G'(z) - y + 2 rho (z - c) is strictly increasing.
  const auto grad = [&](double z) { return model.mean_map(z) - y + 2.0 * rho * (z - c); };
  const auto hess = [&](double z) { return model.curvature(z) + 2.0 * rho; };

  if (grad(lo) >= 0.0) return lo;
  if (grad(hi) <= 0.0) return hi;

  double a = lo;
  double b = hi;
  double z = std::clamp(c, lo, hi);
  for (int it = 0; it < newton_max + 200; ++it) {
    const double g = grad(z);
    if (std::abs(g) <= newton_tol) return z;
    if (g < 0.0) a = z; else b = z;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z))) return z;
    double next = it < newton_max ? z - g / hess(z) : a;  // a sentinel forces bisection below
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    z = next;
  }
  return z;
}

Matrix z_step(const Matrix& x, const Matrix& w, double rho, const Matrix& y, const ObservationMask& mask,
              const ColumnBlockLayout& layout, const AdmmConfig& config) {
  const int n1 = layout.rows();
  const int n2 = layout.cols();
  const Eigen::Index d = n1 + n2;
  if (x.rows() != d || x.cols() != d || w.rows() != d || w.cols() != d) {
    throw ConfigError("z_step: iterate dimension does not match the layout");
  }

  Matrix z = x + w / rho;

  for (int b = 0; b < layout.num_blocks(); ++b) {
    const ExpFamModel& model = layout.block(b).model;
    const auto [lo, hi] = entry_box(model, config.alpha);
    for (int j = layout.block_start(b); j < layout.block_end(b); ++j) {
      for (int i = 0; i < n1; ++i) {
        const double c = z(i, n1 + j);
        const double v = mask(i, j)
                             ? z12_entry_solve(model, y(i, j), c, rho, config.alpha, config.newton_tol,
                                               config.newton_max)
                             : std::clamp(c, lo, hi);
        z(i, n1 + j) = v;
        z(n1 + j, i) = v;
      }
    }
  }

  // C is symmetric in exact arithmetic; keep Z11 and Z22 exactly symmetric.
  z.topLeftCorner(n1, n1) = 0.5 * (z.topLeftCorner(n1, n1) + z.topLeftCorner(n1, n1).transpose()).eval();
  z.bottomRightCorner(n2, n2) =
      0.5 * (z.bottomRightCorner(n2, n2) + z.bottomRightCorner(n2, n2).transpose()).eval();

  const Vector diag = z.diagonal();
  z.diagonal() = linf_prox(diag, config.lambda / rho);
  return z;
}

Matrix dual_step(const Matrix& w, const Matrix& x, const Matrix& z, double tau, double rho) {
  return w + (tau * rho) * (x - z);
}

Residuals residuals(const Matrix& x, const Matrix& z, const Matrix& z_prev, const Matrix& w_prev,
                    const Matrix& w, double rho) {
  const Matrix w_tilde = w_prev + rho * (x - z);
  const double primal = (x - z).norm();
  const double gap_z = (w_tilde - w).norm();
  const double gap_x = (rho * (z_prev - z) + w - w_tilde).norm();
  return {primal, std::max(gap_z, gap_x)};
}

double balance_gap(double rho, double primal, double dual) {
  if (primal < 0.5 * dual) rho *= 0.7;
  if (dual < 0.5 * primal) rho *= 1.3;
  return std::clamp(rho, kRhoMin, kRhoMax);
}

void validate_observations(const Matrix& y, const ObservationMask& mask, const ColumnBlockLayout& layout) {
  if (y.rows() != layout.rows() || y.cols() != layout.cols()) {
    throw ConfigError("data shape (" + std::to_string(y.rows()) + ", " + std::to_string(y.cols()) +
                      ") does not match layout (" + std::to_string(layout.rows()) + ", " +
                      std::to_string(layout.cols()) + ")");
  }
  if (mask.rows() != y.rows() || mask.cols() != y.cols()) throw ConfigError("mask shape does not match data");
  if (mask.count() == 0) throw ConfigError("no observed entries");
  for (int j = 0; j < y.cols(); ++j) {
    const Kind kind = layout.block_of(j).model->kind();
    for (int i = 0; i < y.rows(); ++i) {
      if (!mask(i, j)) continue;
      const double v = y(i, j);
      const auto where = " at (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (!std::isfinite(v)) throw ConfigError("non-finite observation" + where);
      bool ok = true;
      switch (kind) {
        case Kind::Gaussian: break;
        case Kind::Bernoulli: ok = v == 0.0 || v == 1.0; break;
        case Kind::Poisson:
        case Kind::NegBin: ok = v >= 0.0 && v == std::floor(v); break;
        case Kind::Gamma: ok = v > 0.0; break;
      }
      if (!ok) throw ConfigError("observation " + std::to_string(v) + where + " outside the support of " +
                                 std::string(to_token(kind)));
    }
  }
}

AdmmSolver::AdmmSolver(Matrix y, ObservationMask mask, ColumnBlockLayout layout, AdmmConfig config)
    : y_(std::move(y)), mask_(std::move(mask)), layout_(std::move(layout)), config_(config) {
  config_.validate();
  validate_observations(y_, mask_, layout_);
  const Eigen::Index d = layout_.rows() + layout_.cols();
  // Cold start Z = I: PSD, and Z12 = 0 is within 1e-8 of every entry box.
  state_.Z = Matrix::Identity(d, d);
  state_.X = state_.Z;
  state_.W = Matrix::Zero(d, d);
  state_.rho = config_.rho0;
}

void AdmmSolver::step() {
  if (finished()) return;
  const double rho = state_.rho;
  Matrix x = x_step(state_.Z, state_.W, config_.mu, rho, config_.eig_mode);
  Matrix z = z_step(x, state_.W, rho, y_, mask_, layout_, config_);
  Matrix w = dual_step(state_.W, x, z, config_.tau, rho);

  const Residuals raw = residuals(x, z, state_.Z, state_.W, w, rho);
  const double scale = 1.0 + z.norm();
  const Residuals rel{raw.primal / scale, raw.dual / scale};

  const double change = (z - state_.Z).norm() / (1.0 + state_.Z.norm());
  flat_steps_ = change < config_.stagnation_tol ? flat_steps_ + 1 : 0;

  state_.X = std::move(x);
  state_.Z = std::move(z);
  state_.W = std::move(w);
  ++state_.t;
  state_.history.push_back({state_.t, raw, rel, rho});

  if (std::max(rel.primal, rel.dual) < config_.tol) {
    converged_ = true;
  } else if (flat_steps_ >= config_.stagnation_window) {
    stagnated_ = true;
  }
  if (config_.adapt_rho) state_.rho = balance_gap(rho, raw.primal, raw.dual);
}

CompletionResult AdmmSolver::result() const {
  const int n1 = layout_.rows();
  const int n2 = layout_.cols();
  CompletionResult out;
  out.theta_hat = state_.Z.topRightCorner(n1, n2);
  out.completed.resize(n1, n2);
  for (int b = 0; b < layout_.num_blocks(); ++b) {
    const ExpFamModel& model = layout_.block(b).model;
    const auto [lo, hi] = entry_box(model, config_.alpha);
    for (int j = layout_.block_start(b); j < layout_.block_end(b); ++j) {
      for (int i = 0; i < n1; ++i) {
        const double theta = std::clamp(out.theta_hat(i, j), lo, hi);
        out.theta_hat(i, j) = theta;
        out.completed(i, j) = model.mean_map(theta);
      }
    }
  }
  out.iterations = state_.t;
  if (!state_.history.empty()) {
    out.final_raw = state_.history.back().raw;
    out.final_relative = state_.history.back().relative;
  }
  out.converged = converged_;
  out.stagnated = stagnated_;
  out.trace = state_.history;
  return out;
}

CompletionResult AdmmSolver::run() {
  while (!finished()) step();
  return result();
}

CompletionResult solve(const Matrix& y, const ObservationMask& mask, const ColumnBlockLayout& layout,
                       const AdmmConfig& config) {
  return AdmmSolver(y, mask, layout, config).run();
}

}  // namespace mixedmc
