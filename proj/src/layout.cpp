#include "mixedmc/layout.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include "mixedmc/errors.hpp"

namespace mixedmc {

ColumnBlockLayout::ColumnBlockLayout(int rows, std::vector<ColumnBlock> blocks)
    : rows_(rows), blocks_(std::move(blocks)) {
  if (rows_ < 1) throw ConfigError("layout: row count must be >= 1");
  if (blocks_.empty()) throw ConfigError("layout: at least one column block is required");
  starts_.reserve(blocks_.size() + 1);
  starts_.push_back(0);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].width < 1) throw ConfigError("layout: block widths must be >= 1");
    starts_.push_back(starts_.back() + blocks_[b].width);
    column_block_.insert(column_block_.end(), blocks_[b].width, static_cast<int>(b));
  }
}

ColumnBlockLayout ColumnBlockLayout::parse(std::string_view text, int rows) {
  std::vector<ColumnBlock> blocks;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    long long width = 0;
    std::string extra;
    if (!(fields >> width) || (fields >> extra)) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": expected '<kind>[:<nuisance>] <width>'");
    }
    if (width < 1 || width > std::numeric_limits<int>::max()) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": width must be >= 1");
    }
    try {
      blocks.push_back({ExpFamModel::parse(kind), static_cast<int>(width)});
    } catch (const ConfigError& e) {
      throw ConfigError("layout line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ColumnBlockLayout(rows, std::move(blocks));
}

std::string ColumnBlockLayout::to_text() const {
  std::string out;
  for (const auto& b : blocks_) out += b.model.to_string() + " " + std::to_string(b.width) + "\n";
  return out;
}

BlockRef ColumnBlockLayout::block_of(int column) const {
  if (column < 0 || column >= cols()) {
    throw std::out_of_range("column " + std::to_string(column) + " outside layout of width " +
                            std::to_string(cols()));
  }
  const int b = column_block_[column];
  return {b, &blocks_[b].model};
}

SamplingScheme SamplingScheme::uniform(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sampling rate must lie in (0, 1]");
  return SamplingScheme(UniformSampling{p}, p);
}

SamplingScheme SamplingScheme::non_uniform(Matrix pi) {
  if (pi.size() == 0) throw ConfigError("non-uniform sampling matrix is empty");
  if (!(pi.array() > 0.0).all() || !(pi.array() <= 1.0).all()) {
    throw ConfigError("sampling probabilities must lie in (0, 1]");
  }
  const double floor = pi.minCoeff();
  return SamplingScheme(NonUniformSampling{std::move(pi)}, floor);
}

double SamplingScheme::probability(int i, int j) const {
  if (const auto* u = std::get_if<UniformSampling>(&scheme_)) return u->p;
  return std::get<NonUniformSampling>(scheme_).pi(i, j);
}

void SamplingScheme::check_shape(int rows, int cols) const {
  if (const auto* nu = std::get_if<NonUniformSampling>(&scheme_)) {
    if (nu->pi.rows() != rows || nu->pi.cols() != cols) {
      throw ConfigError("sampling matrix shape does not match (" + std::to_string(rows) + ", " +
                        std::to_string(cols) + ")");
    }
  }
}

ObservationMask ObservationMask::all(int rows, int cols, bool value) {
  return {MaskArray::Constant(rows, cols, value)};
}

ObservationMask make_mask(const SamplingScheme& scheme, int rows, int cols, Rng& rng) {
  scheme.check_shape(rows, cols);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  ObservationMask mask{MaskArray(rows, cols)};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) mask.observed(i, j) = coin(rng) < scheme.probability(i, j);
  }
  return mask;
}

Matrix apply_mask(const Matrix& x, const ObservationMask& mask) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) throw ConfigError("apply_mask: shape mismatch");
  return mask.observed.select(x, Matrix::Zero(x.rows(), x.cols()));
}

}  // namespace mixedmc
