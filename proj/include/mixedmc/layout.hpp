#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mixedmc/expfam.hpp"
#include "mixedmc/matnorm.hpp"

namespace mixedmc {

struct ColumnBlock {
  ExpFamModel model;
  int width = 0;
};

struct BlockRef {
  int index = 0;
  const ExpFamModel* model = nullptr;
};

/// Contiguous typed column blocks of an n1 x N2 matrix.
class ColumnBlockLayout {
 public:
  ColumnBlockLayout(int rows, std::vector<ColumnBlock> blocks);

  /// Reads `<kind>[:<nuisance>] <width>` lines; '#' starts a comment.
  static ColumnBlockLayout parse(std::string_view text, int rows);
  /// Blocks only (no row count), in the same text format.
  std::string to_text() const;

  int rows() const { return rows_; }
  int cols() const { return starts_.back(); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<ColumnBlock>& blocks() const { return blocks_; }
  const ColumnBlock& block(int index) const { return blocks_.at(index); }
  int block_start(int index) const { return starts_.at(index); }
  int block_end(int index) const { return starts_.at(index + 1); }

  /// Block containing column j; throws std::out_of_range past the last column.
  BlockRef block_of(int column) const;

 private:
  int rows_;
  std::vector<ColumnBlock> blocks_;
  std::vector<int> starts_;  // prefix sums of widths, size num_blocks + 1
  std::vector<int> column_block_;
};

struct UniformSampling {
  double p = 1.0;
};

struct NonUniformSampling {
  Matrix pi;
};

/// Observation probabilities; every probability lies in (0, 1].
class SamplingScheme {
 public:
  static SamplingScheme uniform(double p);
  static SamplingScheme non_uniform(Matrix pi);

  bool is_uniform() const { return std::holds_alternative<UniformSampling>(scheme_); }
  double probability(int i, int j) const;
  /// Lower bound p on all probabilities.
  double min_probability() const { return floor_; }
  /// Checks the shape of a non-uniform matrix against (rows, cols).
  void check_shape(int rows, int cols) const;

 private:
  explicit SamplingScheme(std::variant<UniformSampling, NonUniformSampling> s, double floor)
      : scheme_(std::move(s)), floor_(floor) {}

  std::variant<UniformSampling, NonUniformSampling> scheme_;
  double floor_;
};

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct ObservationMask {
  MaskArray observed;

  int rows() const { return static_cast<int>(observed.rows()); }
  int cols() const { return static_cast<int>(observed.cols()); }
  long long count() const { return observed.count(); }
  bool operator()(int i, int j) const { return observed(i, j); }

  static ObservationMask all(int rows, int cols, bool value);
};

/// One independent coin per entry, scanned row-major.
ObservationMask make_mask(const SamplingScheme& scheme, int rows, int cols, Rng& rng);

/// Zeroes entries where the mask is false.
Matrix apply_mask(const Matrix& x, const ObservationMask& mask);

}  // namespace mixedmc
