#include "mixedmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "mixedmc/errors.hpp"
#include "mixedmc/io.hpp"

namespace mixedmc {

AdmmConfig theory_config(const ColumnBlockLayout& layout, double p, double gamma, const PenaltyRule& rule,
                         AdmmConfig base) {
  theory::BoundInputs in = theory::bound_inputs_for(layout, 1, p, gamma, rule.K, rule.negative_upper);
  in.c_abs = rule.c_abs;
  in.kappa = rule.kappa;
  const theory::SolverPenalties pen = theory::solver_penalties(in, rule.form);
  base.mu = pen.mu;
  base.lambda = pen.lambda;
  return base;
}

RunOutcome run_instance(const SyntheticInstance& inst, const AdmmConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.result = solve(inst.observed(), inst.mask, inst.layout, config);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.error = relative_error(out.result.theta_hat, inst.theta_true, inst.layout);
  out.mean_error = mean_scale_error(out.result.theta_hat, inst.theta_true, inst.layout);
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
}

void SweepConfig::validate() const {
  if (seeds.empty()) throw ConfigError("sweep: seed list is empty");
  if (axis == SweepAxis::Rate && rates.empty()) throw ConfigError("sweep: rate list is empty");
  if (axis == SweepAxis::Rank && ranks.empty()) throw ConfigError("sweep: rank list is empty");
  const auto bad_rate = [](double r) { return !(r > 0.0 && r <= 1.0); };
  const bool rate_axis = axis == SweepAxis::Rate;
  if ((rate_axis && std::any_of(rates.begin(), rates.end(), bad_rate)) || bad_rate(fixed_rate)) {
    throw ConfigError("sweep: sampling rates must lie in (0, 1]");
  }
  const int small = std::min(rows, cols);
  const auto bad_rank = [small](int r) { return r < 1 || r > small; };
  if ((!rate_axis && std::any_of(ranks.begin(), ranks.end(), bad_rank)) || bad_rank(fixed_rank)) {
    throw ConfigError("sweep: ranks must lie in [1, min(rows, cols)]");
  }
  if (rows < 1 || cols < 5) throw ConfigError("sweep: need rows >= 1 and cols >= 5");
  if (threads < 1) throw ConfigError("sweep: threads must be >= 1");
  solver.validate();
}

namespace {

std::vector<double> axis_values(const SweepConfig& c) {
  if (c.axis == SweepAxis::Rate) return c.rates;
  return {c.ranks.begin(), c.ranks.end()};
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  const ColumnBlockLayout layout = mixed_layout(config.rows, config.cols);
  const std::vector<double> values = axis_values(config);
  const int nseeds = static_cast<int>(config.seeds.size());
  const int cells = static_cast<int>(values.size()) * nseeds;
  std::vector<SweepRecord> records(static_cast<std::size_t>(cells));

  parallel_for(cells, config.threads, [&](int cell) {
    const double value = values[static_cast<std::size_t>(cell / nseeds)];
    const std::uint64_t seed = config.seeds[static_cast<std::size_t>(cell % nseeds)];
    const double rate = config.axis == SweepAxis::Rate ? value : config.fixed_rate;
    const int rank = config.axis == SweepAxis::Rank ? static_cast<int>(value) : config.fixed_rank;
    const SyntheticInstance inst = make_instance(layout, rank, config.gamma, SamplingScheme::uniform(rate), seed);
    const AdmmConfig solver =
        config.theory_penalties ? theory_config(layout, rate, config.gamma, config.rule, config.solver) : config.solver;
    const RunOutcome run = run_instance(inst, solver);
    records[static_cast<std::size_t>(cell)] = {value, seed, run.error, run.mean_error, run.result.iterations,
                                               run.result.converged};
  });
  return records;
}

std::string sweep_csv(const SweepConfig& config, const ColumnBlockLayout& layout,
                      const std::vector<SweepRecord>& records) {
  std::string out = config.axis == SweepAxis::Rate ? "rate" : "rank";
  out += ",seed";
  for (const auto& b : layout.blocks()) out += ",err_" + std::string(to_token(b.model.kind()));
  out += ",average,overall,mean_scale_average,iterations,converged\n";
  for (const auto& r : records) {
    out += io::format_double(r.value) + "," + std::to_string(r.seed);
    for (double e : r.error.per_block) out += "," + io::format_double(e);
    out += "," + io::format_double(r.error.average) + "," + io::format_double(r.error.overall) + "," +
           io::format_double(r.mean_error.average) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "\n";
  }
  return out;
}

LinePlot sweep_plot(const SweepConfig& config, const ColumnBlockLayout& layout,
                    const std::vector<SweepRecord>& records) {
  const std::vector<double> values = axis_values(config);
  LinePlot plot;
  plot.x_label = config.axis == SweepAxis::Rate ? "sampling rate" : "rank";
  plot.y_label = "relative error (canonical scale)";
  plot.title = config.axis == SweepAxis::Rate ? "error vs sampling rate" : "error vs rank";
  const int nblocks = layout.num_blocks();
  for (int b = 0; b <= nblocks; ++b) {
    PlotSeries s;
    s.label = b < nblocks ? std::string(to_token(layout.block(b).model.kind())) : "average";
    for (double v : values) {
      double sum = 0.0;
      int count = 0;
      for (const auto& r : records) {
        if (r.value != v) continue;
        sum += b < nblocks ? r.error.per_block[static_cast<std::size_t>(b)] : r.error.average;
        ++count;
      }
      s.x.push_back(v);
      s.y.push_back(count ? sum / count : 0.0);
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

std::vector<EigBenchRecord> run_bench_eig(const EigBenchConfig& config) {
  if (config.ranks.empty() || config.seeds.empty()) throw ConfigError("bench-eig: rank and seed lists must be non-empty");
  if (!(config.rate > 0.0 && config.rate <= 1.0)) throw ConfigError("bench-eig: rate must lie in (0, 1]");
  const ColumnBlockLayout layout = mixed_layout(config.rows, config.cols);
  const int dim = config.rows + config.cols;
  const int k = config.k > 0 ? config.k : default_truncation(dim);
  const int nseeds = static_cast<int>(config.seeds.size());
  const int cells = static_cast<int>(config.ranks.size()) * nseeds;
  std::vector<EigBenchRecord> records(static_cast<std::size_t>(cells));

  parallel_for(cells, config.threads, [&](int cell) {
    const int rank = config.ranks[static_cast<std::size_t>(cell / nseeds)];
    const std::uint64_t seed = config.seeds[static_cast<std::size_t>(cell % nseeds)];
    const SyntheticInstance inst =
        make_instance(layout, rank, config.gamma, SamplingScheme::uniform(config.rate), seed);
    AdmmConfig full = config.theory_penalties
                          ? theory_config(layout, config.rate, config.gamma, config.rule, config.solver)
                          : config.solver;
    full.eig_mode = EigMode::full();
    AdmmConfig trunc = full;
    trunc.eig_mode = EigMode::truncated(k);
    const RunOutcome a = run_instance(inst, full);
    const RunOutcome b = run_instance(inst, trunc);
    records[static_cast<std::size_t>(cell)] = {rank,
                                               seed,
                                               a.error.average,
                                               b.error.average,
                                               a.seconds,
                                               b.seconds,
                                               a.result.iterations,
                                               b.result.iterations};
  });
  return records;
}

std::string bench_eig_csv(const std::vector<EigBenchRecord>& records) {
  std::string out = "rank,seed,err_full,err_trunc,seconds_full,seconds_trunc,iterations_full,iterations_trunc\n";
  for (const auto& r : records) {
    out += std::to_string(r.rank) + "," + std::to_string(r.seed) + "," + io::format_double(r.err_full) + "," +
           io::format_double(r.err_trunc) + "," + io::format_double(r.seconds_full) + "," +
           io::format_double(r.seconds_trunc) + "," + std::to_string(r.iterations_full) + "," +
           std::to_string(r.iterations_trunc) + "\n";
  }
  return out;
}

}  // namespace mixedmc
