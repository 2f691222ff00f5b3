#include "mixedmc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mixedmc/errors.hpp"
#include "mixedmc/io.hpp"

namespace mixedmc {

namespace fs = std::filesystem;

LowRankTheta gen_low_rank_theta(const ColumnBlockLayout& layout, int rank, double gamma, Rng& rng) {
  const int n1 = layout.rows();
  const int n2 = layout.cols();
  if (rank < 1 || rank > std::min(n1, n2)) throw ConfigError("rank must lie in [1, min(n1, N2)]");
  if (!(gamma > kDomainGuard) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");

  std::normal_distribution<double> normal;
  Matrix a(n1, rank);
  Matrix b(n2, rank);
  // Filled element by element so the stream order does not depend on Eigen internals.
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < rank; ++k) a(i, k) = normal(rng);
  for (int j = 0; j < n2; ++j)
    for (int k = 0; k < rank; ++k) b(j, k) = normal(rng);

  LowRankTheta out;
  out.theta = a * b.transpose();
  const double peak = out.theta.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw NumericalError("degenerate low-rank draw");
  out.theta *= gamma / peak;

  // [-gamma, gamma] -> [-gamma, -eps]
  const double scale = (gamma - kDomainGuard) / (2.0 * gamma);
  for (int blk = 0; blk < layout.num_blocks(); ++blk) {
    if (!layout.block(blk).model.negative_domain()) continue;
    auto cols = out.theta.middleCols(layout.block_start(blk), layout.block(blk).width);
    cols = ((cols.array() - gamma) * scale - kDomainGuard).matrix();
    cols = cols.cwiseMin(-kDomainGuard);
    out.shifted = true;
  }
  return out;
}

Matrix sample_full(const Matrix& theta, const ColumnBlockLayout& layout, Rng& rng) {
  if (theta.rows() != layout.rows() || theta.cols() != layout.cols()) {
    throw ConfigError("sample_full: theta shape does not match layout");
  }
  Matrix y(theta.rows(), theta.cols());
  for (int i = 0; i < theta.rows(); ++i) {
    for (int j = 0; j < theta.cols(); ++j) y(i, j) = layout.block_of(j).model->sample(theta(i, j), rng);
  }
  return y;
}

Matrix gen_observed(const Matrix& theta, const ColumnBlockLayout& layout, const ObservationMask& mask, Rng& rng) {
  if (mask.rows() != theta.rows() || mask.cols() != theta.cols()) {
    throw ConfigError("gen_observed: mask shape does not match theta");
  }
  return apply_mask(sample_full(theta, layout, rng), mask);
}

SyntheticInstance make_instance(const ColumnBlockLayout& layout, int rank, double gamma,
                                const SamplingScheme& scheme, std::uint64_t seed) {
  scheme.check_shape(layout.rows(), layout.cols());
  Rng data_rng(seed);
  std::seed_seq mask_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d61736bu};
  Rng mask_rng(mask_seq);

  SyntheticInstance inst{.theta_true = {},
                         .layout = layout,
                         .y_full = {},
                         .mask = {},
                         .seed = seed,
                         .rank_target = rank,
                         .gamma = gamma,
                         .p = scheme.min_probability(),
                         .shifted = false};
  LowRankTheta truth = gen_low_rank_theta(layout, rank, gamma, data_rng);
  inst.theta_true = std::move(truth.theta);
  inst.shifted = truth.shifted;
  inst.y_full = sample_full(inst.theta_true, layout, data_rng);
  inst.mask = make_mask(scheme, layout.rows(), layout.cols(), mask_rng);
  return inst;
}

ColumnBlockLayout mixed_layout(int rows, int cols, double gamma_shape, double negbin_r) {
  if (cols < 5) throw ConfigError("mixed layout needs at least 5 columns");
  const std::vector<ExpFamModel> models{ExpFamModel::gaussian(), ExpFamModel::bernoulli(), ExpFamModel::poisson(),
                                        ExpFamModel::gamma(gamma_shape), ExpFamModel::negbin(negbin_r)};
  std::vector<ColumnBlock> blocks;
  const int base = cols / 5;
  const int extra = cols % 5;
  for (int b = 0; b < 5; ++b) blocks.push_back({models[b], base + (b < extra ? 1 : 0)});
  return ColumnBlockLayout(rows, std::move(blocks));
}

namespace {

double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

ErrorReport block_errors(const Matrix& hat, const Matrix& truth, const ColumnBlockLayout& layout) {
  if (hat.rows() != truth.rows() || hat.cols() != truth.cols() || truth.rows() != layout.rows() ||
      truth.cols() != layout.cols()) {
    throw ConfigError("relative_error: shape mismatch");
  }
  ErrorReport rep;
  for (int b = 0; b < layout.num_blocks(); ++b) {
    const int start = layout.block_start(b);
    const int width = layout.block(b).width;
    rep.per_block.push_back(
        ratio((hat.middleCols(start, width) - truth.middleCols(start, width)).norm(), truth.middleCols(start, width).norm()));
  }
  double sum = 0.0;
  for (double e : rep.per_block) sum += e;
  rep.average = rep.per_block.empty() ? 0.0 : sum / static_cast<double>(rep.per_block.size());
  rep.overall = ratio((hat - truth).norm(), truth.norm());
  return rep;
}

Matrix to_mean_scale(const Matrix& theta, const ColumnBlockLayout& layout) {
  Matrix out(theta.rows(), theta.cols());
  for (int j = 0; j < theta.cols(); ++j) {
    const ExpFamModel& model = *layout.block_of(j).model;
    for (int i = 0; i < theta.rows(); ++i) out(i, j) = model.mean_map(theta(i, j));
  }
  return out;
}

}  // namespace

ErrorReport relative_error(const Matrix& theta_hat, const Matrix& theta_true, const ColumnBlockLayout& layout) {
  return block_errors(theta_hat, theta_true, layout);
}

ErrorReport mean_scale_error(const Matrix& theta_hat, const Matrix& theta_true, const ColumnBlockLayout& layout) {
  if (theta_hat.cols() != layout.cols() || theta_true.cols() != layout.cols()) {
    throw ConfigError("mean_scale_error: shape mismatch");
  }
  return block_errors(to_mean_scale(theta_hat, layout), to_mean_scale(theta_true, layout), layout);
}

double weighted_frobenius(const Matrix& a, const SamplingScheme& scheme) {
  scheme.check_shape(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  double sum = 0.0;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) sum += scheme.probability(i, j) * a(i, j) * a(i, j);
  return std::sqrt(sum);
}

void save_instance(const SyntheticInstance& inst, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_csv_matrix(dir / "theta.csv", inst.theta_true);
  io::write_csv_matrix(dir / "y.csv", inst.y_full);
  io::write_mask(dir / "mask.csv", inst.mask);
  io::atomic_write(dir / "layout.txt", inst.layout.to_text());
  std::string meta;
  meta += "seed = " + std::to_string(inst.seed) + "\n";
  meta += "rank = " + std::to_string(inst.rank_target) + "\n";
  meta += "gamma = " + io::format_double(inst.gamma) + "\n";
  meta += "p = " + io::format_double(inst.p) + "\n";
  meta += "rows = " + std::to_string(inst.layout.rows()) + "\n";
  meta += std::string("shifted = ") + (inst.shifted ? "1" : "0") + "\n";
  io::atomic_write(dir / "meta", meta);
}

SyntheticInstance load_instance(const fs::path& dir) {
  const auto meta = io::parse_key_values(io::read_text(dir / "meta"));
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ConfigError((dir / "meta").string() + ": missing key '" + key + "'");
    return it->second;
  };
  Matrix theta = io::read_csv_matrix(dir / "theta.csv");
  ColumnBlockLayout layout = ColumnBlockLayout::parse(io::read_text(dir / "layout.txt"), static_cast<int>(theta.rows()));
  Matrix y = io::read_csv_matrix(dir / "y.csv");
  ObservationMask mask = io::read_mask(dir / "mask.csv");
  if (theta.cols() != layout.cols() || y.rows() != theta.rows() || y.cols() != theta.cols() ||
      mask.rows() != theta.rows() || mask.cols() != theta.cols()) {
    throw ConfigError(dir.string() + ": instance files disagree in shape");
  }
  SyntheticInstance inst{.theta_true = std::move(theta),
                         .layout = std::move(layout),
                         .y_full = std::move(y),
                         .mask = std::move(mask),
                         .seed = 0,
                         .rank_target = 0,
                         .gamma = 0.0,
                         .p = 1.0,
                         .shifted = false};
  inst.seed = io::parse_uint(get("seed"));
  inst.rank_target = static_cast<int>(io::parse_uint(get("rank")));
  inst.gamma = io::parse_double(get("gamma"));
  if (meta.count("p")) inst.p = io::parse_double(meta.at("p"));
  if (meta.count("shifted")) inst.shifted = meta.at("shifted") == "1";
  return inst;
}

}  // namespace mixedmc
