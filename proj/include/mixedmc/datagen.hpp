#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mixedmc/expfam.hpp"
#include "mixedmc/layout.hpp"
#include "mixedmc/matnorm.hpp"

namespace mixedmc {

struct LowRankTheta {
  Matrix theta;
  /// True when a Gamma/NegBin block was shifted into the negative range,
  /// which can raise the rank by one.
  bool shifted = false;
};

/**
 * Theta = A B^T with i.i.d. standard normal A (n1 x rank) and B (N2 x rank),
 * rescaled so that max |Theta_ij| = gamma. Each Gamma/NegBin block is then
 * mapped affinely from [-gamma, gamma] onto [-gamma, -kDomainGuard].
 */
LowRankTheta gen_low_rank_theta(const ColumnBlockLayout& layout, int rank, double gamma, Rng& rng);

/// Draws every entry from its block's model at the canonical parameter.
Matrix sample_full(const Matrix& theta, const ColumnBlockLayout& layout, Rng& rng);

/// sample_full followed by apply_mask: unobserved entries are stored as 0.
Matrix gen_observed(const Matrix& theta, const ColumnBlockLayout& layout, const ObservationMask& mask, Rng& rng);

struct SyntheticInstance {
  Matrix theta_true;
  ColumnBlockLayout layout;
  Matrix y_full;
  ObservationMask mask;
  std::uint64_t seed = 0;
  int rank_target = 0;
  double gamma = 0.0;
  double p = 1.0;
  bool shifted = false;

  Matrix observed() const { return apply_mask(y_full, mask); }
};

/**
 * Builds an instance from one seed. The truth and the full data come from
 * one random stream and the mask from a second one, so instances with the
 * same seed share Theta and Y and differ only in which entries are seen;
 * under uniform sampling the masks are nested in p.
 */
SyntheticInstance make_instance(const ColumnBlockLayout& layout, int rank, double gamma,
                                const SamplingScheme& scheme, std::uint64_t seed);

/// The five-kind layout used by the experiments: gaussian, bernoulli,
/// poisson, gamma:2, negbin:2, with widths as equal as possible.
ColumnBlockLayout mixed_layout(int rows, int cols, double gamma_shape = 2.0, double negbin_r = 2.0);

struct ErrorReport {
  std::vector<double> per_block;
  double average = 0.0;  // mean of per_block
  double overall = 0.0;  // ||hat - truth||_F / ||truth||_F over the whole matrix
};

/// ||hat_b - truth_b||_F / ||truth_b||_F for each block.
ErrorReport relative_error(const Matrix& theta_hat, const Matrix& theta_true, const ColumnBlockLayout& layout);

/// Same measure on the mean scale, after applying each block's mean map.
ErrorReport mean_scale_error(const Matrix& theta_hat, const Matrix& theta_true, const ColumnBlockLayout& layout);

/// sqrt(sum_ij pi_ij A_ij^2).
double weighted_frobenius(const Matrix& a, const SamplingScheme& scheme);

/// theta.csv, y.csv, mask.csv, layout.txt and meta (key=value).
void save_instance(const SyntheticInstance& inst, const std::filesystem::path& dir);
SyntheticInstance load_instance(const std::filesystem::path& dir);

}  // namespace mixedmc
