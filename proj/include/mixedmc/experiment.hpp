#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixedmc/datagen.hpp"
#include "mixedmc/solver.hpp"
#include "mixedmc/svg_plot.hpp"
#include "mixedmc/theory.hpp"

namespace mixedmc {

/// Knobs of the theory-driven penalty choice.
struct PenaltyRule {
  double c_abs = 1.0;
  double kappa = 1.0;
  double K = 1.0;
  /// Upper end of the Gamma/NegBin canonical range used for U_gamma.
  std::optional<double> negative_upper;
  theory::LambdaForm form = theory::LambdaForm::SqrtSum;
};

/// `base` with mu and lambda replaced by the theory penalties for this layout.
AdmmConfig theory_config(const ColumnBlockLayout& layout, double p, double gamma, const PenaltyRule& rule,
                         AdmmConfig base = {});

struct RunOutcome {
  CompletionResult result;
  ErrorReport error;
  ErrorReport mean_error;
  double seconds = 0.0;
};

/// Solves one synthetic instance and scores it against its truth.
RunOutcome run_instance(const SyntheticInstance& inst, const AdmmConfig& config);

enum class SweepAxis { Rate, Rank };

struct SweepConfig {
  SweepAxis axis = SweepAxis::Rate;
  std::vector<double> rates{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> ranks{2, 5, 10, 20};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int rows = 50;
  int cols = 50;
  double gamma = 8.0;
  double fixed_rate = 0.8;
  int fixed_rank = 3;
  AdmmConfig solver;
  /// When false, solver.mu and solver.lambda are used as given.
  bool theory_penalties = true;
  PenaltyRule rule;
  int threads = 1;

  void validate() const;
};

struct SweepRecord {
  double value = 0.0;  // rate or rank
  std::uint64_t seed = 0;
  ErrorReport error;
  ErrorReport mean_error;
  int iterations = 0;
  bool converged = false;
};

/// Runs every (axis value, seed) cell on a pool of `threads` workers.
/// Records come back in axis-major, seed-minor order regardless of scheduling.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

/// Header row, then one row per record. Contains no timings, so equal
/// configurations give byte-identical text.
std::string sweep_csv(const SweepConfig& config, const ColumnBlockLayout& layout,
                      const std::vector<SweepRecord>& records);

/// Seed-averaged canonical error against the swept axis, one series per
/// block kind plus the average.
LinePlot sweep_plot(const SweepConfig& config, const ColumnBlockLayout& layout,
                    const std::vector<SweepRecord>& records);

struct EigBenchConfig {
  std::vector<int> ranks{2, 5};
  std::vector<std::uint64_t> seeds{1};
  int rows = 50;
  int cols = 50;
  double gamma = 8.0;
  double rate = 0.8;
  /// Truncation size; 0 picks ceil(dim / 10) of the embedding dimension.
  int k = 0;
  AdmmConfig solver;
  bool theory_penalties = true;
  PenaltyRule rule;
  int threads = 1;
};

struct EigBenchRecord {
  int rank = 0;
  std::uint64_t seed = 0;
  double err_full = 0.0;
  double err_trunc = 0.0;
  double seconds_full = 0.0;
  double seconds_trunc = 0.0;
  int iterations_full = 0;
  int iterations_trunc = 0;
};

std::vector<EigBenchRecord> run_bench_eig(const EigBenchConfig& config);
std::string bench_eig_csv(const std::vector<EigBenchRecord>& records);

/// Calls fn(i) for i in [0, n) on at most `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace mixedmc
