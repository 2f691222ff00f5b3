#pragma once

#include <string>
#include <vector>

#include "mixedmc/expfam.hpp"

namespace mixedmc {

struct DetectOptions {
  /// Poisson when var/mean lies in [1 - d_tol, 1 + d_tol].
  double d_tol = 0.5;
  /// Evaluation points of the MGF distance.
  std::vector<double> grid = default_mgf_grid();
  int min_values = 30;
  /// |x - round(x)| at or below this counts as an integer.
  double int_tol = 1e-9;

  /// 11 equally spaced points on [-0.2, 0.2].
  static std::vector<double> default_mgf_grid();
};

/// Maximum-likelihood fit of one family to a sample.
struct FitResult {
  ExpFamModel model = ExpFamModel::gaussian();
  double mean = 0.0;
  /// Bernoulli success probability, NegBin p = r / (r + mean); 0 otherwise.
  double prob = 0.0;
  /// Gamma scale = mean / shape; 0 otherwise.
  double scale = 0.0;
};

struct DetectionReport {
  FitResult fit;
  /// MGF distance of the chosen fit; 0 when no comparison was needed.
  double score = 0.0;
  std::vector<std::string> rules;

  Kind kind() const { return fit.model.kind(); }
  /// `kind=<token> score=<real> rules=<r1>;<r2>...`
  std::string to_string() const;
};

/// Throws DomainError when the sample lies outside the family's support.
FitResult fit_mle(Kind kind, const std::vector<double>& values);

/// Mean squared difference between the empirical MGF and the fitted MGF on
/// the grid points t with 2t inside the fitted MGF's domain (so the
/// empirical MGF has finite variance). Throws ConfigError on an empty grid
/// or when no grid point survives.
double mgf_distance(const std::vector<double>& values, const FitResult& fit, const std::vector<double>& grid);

/// Decision tree over value structure, with MGF scoring where the structure
/// alone does not decide. Only kinds in `candidates` are returned. Ties go
/// to the earlier kind in Gaussian, Bernoulli, Poisson, Gamma, NegBin.
DetectionReport detect(const std::vector<double>& values, const std::vector<Kind>& candidates,
                       const DetectOptions& options = {});
DetectionReport detect(const std::vector<double>& values, const DetectOptions& options = {});

}  // namespace mixedmc
