#pragma once

#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace mixedmc {

using Rng = std::mt19937_64;

/// Canonical parameters of Gamma/NegBin blocks are kept at or below -kDomainGuard.
inline constexpr double kDomainGuard = 1e-8;

enum class Kind { Gaussian, Bernoulli, Poisson, Gamma, NegBin };

std::string_view to_token(Kind kind);
Kind kind_from_token(std::string_view token);

/**
 * One-parameter exponential family in canonical form,
 *
 *   p(x | theta) = h(x) exp(x * theta - G(theta)),
 *
 * with the nuisance parameter (Gaussian variance, Gamma shape, NegBin
 * success count) held fixed. The Gaussian uses sufficient statistic x so
 * G(theta) = sigma^2 theta^2 / 2 and the mean is sigma^2 theta.
 *
 * All member functions reject theta outside the canonical domain with
 * DomainError: (-inf, inf) for Gaussian/Bernoulli/Poisson, (-inf, 0) for
 * Gamma/NegBin.
 */
class ExpFamModel {
 public:
  static ExpFamModel gaussian(double variance = 1.0);
  static ExpFamModel bernoulli();
  static ExpFamModel poisson();
  static ExpFamModel gamma(double shape);
  static ExpFamModel negbin(double successes);

  /// Parses `<kind>[:<nuisance>]`, e.g. "gamma:2.0" or "poisson".
  static ExpFamModel parse(std::string_view spec);

  Kind kind() const { return kind_; }
  /// Variance, shape or success count; 0 for Bernoulli and Poisson.
  double nuisance() const { return nuisance_; }
  /// True for the families whose canonical domain is the negative half-line.
  bool negative_domain() const { return kind_ == Kind::Gamma || kind_ == Kind::NegBin; }
  bool in_domain(double theta) const;
  /// Largest canonical value the solver and generators may use.
  double upper_limit() const;

  double log_partition(double theta) const;
  double mean_map(double theta) const;
  double curvature(double theta) const;
  /// Inverse of mean_map; throws DomainError when `mean` is outside the mean domain.
  double canonical_from_mean(double mean) const;

  /// Per-entry negative log-likelihood up to the base measure: G(theta) - y theta.
  double nll_term(double y, double theta) const;
  /// d(x, y) = G(x) - G(y) - (x - y) G'(y).
  double bregman(double x, double y) const;

  double sample(double theta, Rng& rng) const;

  /// Round-trips through parse().
  std::string to_string() const;

  friend bool operator==(const ExpFamModel&, const ExpFamModel&) = default;

 private:
  ExpFamModel(Kind kind, double nuisance) : kind_(kind), nuisance_(nuisance) {}
  void check_domain(double theta) const;

  Kind kind_;
  double nuisance_;
};

/// Uniform curvature bounds of G over the curvature interval.
/// Stored on the curvature scale: lower <= G''(eta) <= upper.
struct CurvatureBounds {
  double lower = 0.0;
  double upper = 0.0;
  double gamma = 0.0;
  double K = 0.0;
};

/// Closed-form curvature bounds over [-(gamma + 1/K), gamma + 1/K], intersected
/// with the canonical domain. For Gamma and NegBin the negative range is
/// [-(gamma + 1/K), negative_upper]; `negative_upper` defaults to -kDomainGuard.
CurvatureBounds curvature_bounds(const ExpFamModel& model, double gamma, double K,
                                 std::optional<double> negative_upper = std::nullopt);

}  // namespace mixedmc
