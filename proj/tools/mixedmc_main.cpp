// mixedmc: command-line front end for mixed-type matrix completion.
//
//   mixedmc complete  --layout L --data Y [--mask M] [--truth T] --out DIR
//   mixedmc complete  --instance DIR --out DIR
//   mixedmc simulate  --axis rate|rank --out DIR
//   mixedmc detect    --data Y --out DIR
//   mixedmc bench-eig --out DIR
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mixedmc/datagen.hpp"
#include "mixedmc/errors.hpp"
#include "mixedmc/experiment.hpp"
#include "mixedmc/io.hpp"
#include "mixedmc/solver.hpp"
#include "mixedmc/svg_plot.hpp"
#include "mixedmc/theory.hpp"
#include "mixedmc/typedetect.hpp"

namespace fs = std::filesystem;
using namespace mixedmc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  double tol = 1e-4;
  int max_iter = 2000;
  std::string eig = "full";
  std::optional<double> mu;
  std::optional<double> lambda;
  double alpha = 10.0;
};

struct PenaltyFlags {
  double gamma = 8.0;
  double c_abs = 1.0;
  double kappa = 1.0;
  double K = 1.0;
  std::optional<double> neg_upper;
  bool sqrt_max = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value file; command-line flags win");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--tol", c.tol, "relative residual tolerance");
  app->add_option("--max-iter", c.max_iter, "iteration cap");
  app->add_option("--eig", c.eig, "full | trunc:K");
  app->add_option("--mu", c.mu, "trace weight (overrides the theory rule)");
  app->add_option("--lambda", c.lambda, "diagonal l_inf weight (overrides the theory rule)");
  app->add_option("--alpha", c.alpha, "entrywise box for the canonical parameters");
}

void add_penalty(CLI::App* app, PenaltyFlags& p) {
  app->add_option("--gamma", p.gamma, "sup-norm radius of the truth");
  app->add_option("--c-abs", p.c_abs, "absolute constant c of the lambda* rule");
  app->add_option("--kappa", p.kappa, "lambda_max / lambda*");
  app->add_option("--K", p.K, "interval constant of the curvature bounds");
  app->add_option("--neg-upper", p.neg_upper, "upper end of the Gamma/NegBin canonical range");
  app->add_flag("--sqrt-max", p.sqrt_max, "use sqrt(n1 v N2) in lambda*");
}

PenaltyRule to_rule(const PenaltyFlags& p) {
  PenaltyRule rule;
  rule.c_abs = p.c_abs;
  rule.kappa = p.kappa;
  rule.K = p.K;
  rule.negative_upper = p.neg_upper;
  rule.form = p.sqrt_max ? theory::LambdaForm::SqrtMax : theory::LambdaForm::SqrtSum;
  return rule;
}

AdmmConfig base_config(const Common& c) {
  AdmmConfig cfg;
  cfg.tol = c.tol;
  cfg.max_iter = c.max_iter;
  cfg.eig_mode = EigMode::parse(c.eig);
  cfg.alpha = c.alpha;
  if (c.mu) cfg.mu = *c.mu;
  if (c.lambda) cfg.lambda = *c.lambda;
  return cfg;
}

bool manual_penalty(const Common& c) {
  if (c.mu.has_value() != c.lambda.has_value()) throw ConfigError("--mu and --lambda must be given together");
  return c.mu.has_value();
}

// Feeds `key = value` entries into options not set on the command line.
void apply_config_file(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : io::parse_key_values(io::read_text(path))) {
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw ConfigError(path + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(io::split_list(value));
    opt->run_callback();
  }
}

void write_report(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& lines) {
  std::string text;
  for (const auto& [k, v] : lines) text += k + " = " + v + "\n";
  io::atomic_write(path, text);
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + io::format_double(xs[i]);
  return s;
}

// ---- complete ----

struct CompleteArgs {
  std::string instance;
  std::string layout;
  std::string data;
  std::string mask;
  std::string truth;
};

int cmd_complete(const Common& common, const PenaltyFlags& pen, const CompleteArgs& args) {
  Matrix y;
  ObservationMask mask;
  std::optional<ColumnBlockLayout> layout;
  std::optional<Matrix> truth;

  if (!args.instance.empty()) {
    const SyntheticInstance inst = load_instance(args.instance);
    y = inst.observed();
    mask = inst.mask;
    layout = inst.layout;
    truth = inst.theta_true;
  } else {
    if (args.layout.empty() || args.data.empty()) throw ConfigError("complete needs --instance or --layout and --data");
    if (!fs::exists(args.layout)) throw ConfigError("layout file not found: " + args.layout);
    y = io::read_csv_matrix(args.data);
    layout = ColumnBlockLayout::parse(io::read_text(args.layout), static_cast<int>(y.rows()));
    mask = args.mask.empty() ? ObservationMask::all(static_cast<int>(y.rows()), static_cast<int>(y.cols()), true)
                             : io::read_mask(args.mask);
    if (!args.truth.empty()) truth = io::read_csv_matrix(args.truth);
  }

  AdmmConfig cfg = base_config(common);
  const double p_hat = static_cast<double>(mask.count()) / (static_cast<double>(mask.rows()) * mask.cols());
  if (!manual_penalty(common)) cfg = theory_config(*layout, p_hat, pen.gamma, to_rule(pen), cfg);

  const CompletionResult res = solve(y, mask, *layout, cfg);

  const fs::path out = common.out;
  fs::create_directories(out);
  io::write_csv_matrix(out / "theta_hat.csv", res.theta_hat);
  io::write_csv_matrix(out / "completed.csv", res.completed);
  std::string trace = "iteration,primal,dual,primal_rel,dual_rel,rho\n";
  for (const auto& row : res.trace) {
    trace += std::to_string(row.iteration) + "," + io::format_double(row.raw.primal) + "," +
             io::format_double(row.raw.dual) + "," + io::format_double(row.relative.primal) + "," +
             io::format_double(row.relative.dual) + "," + io::format_double(row.rho) + "\n";
  }
  io::atomic_write(out / "trace.csv", trace);

  std::vector<std::pair<std::string, std::string>> report{
      {"iterations", std::to_string(res.iterations)},
      {"converged", res.converged ? "1" : "0"},
      {"stagnated", res.stagnated ? "1" : "0"},
      {"primal", io::format_double(res.final_raw.primal)},
      {"dual", io::format_double(res.final_raw.dual)},
      {"primal_rel", io::format_double(res.final_relative.primal)},
      {"dual_rel", io::format_double(res.final_relative.dual)},
      {"mu", io::format_double(cfg.mu)},
      {"lambda", io::format_double(cfg.lambda)},
      {"eig", cfg.eig_mode.to_string()},
      {"observed_fraction", io::format_double(p_hat)},
  };
  if (truth) {
    const ErrorReport err = relative_error(res.theta_hat, *truth, *layout);
    const ErrorReport merr = mean_scale_error(res.theta_hat, *truth, *layout);
    report.emplace_back("block_errors", join(err.per_block));
    report.emplace_back("average_error", io::format_double(err.average));
    report.emplace_back("overall_error", io::format_double(err.overall));
    report.emplace_back("mean_scale_average_error", io::format_double(merr.average));
  }
  write_report(out / "report.txt", report);
  std::cout << "iterations " << res.iterations << (res.converged ? " (converged)" : " (not converged)") << "\n";
  return 0;
}

// ---- simulate ----

struct SweepArgs {
  std::string axis = "rate";
  std::vector<double> rates{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> ranks{2, 5, 10, 20};
  int num_seeds = 3;
  int rows = 50;
  int cols = 50;
  double fixed_rate = 0.8;
  int fixed_rank = 3;
  bool large = false;
};

std::vector<std::uint64_t> seed_list(std::uint64_t base, int count) {
  if (count < 1) throw ConfigError("--num-seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

int cmd_simulate(const Common& common, const PenaltyFlags& pen, const SweepArgs& args) {
  SweepConfig cfg;
  if (args.axis == "rate") {
    cfg.axis = SweepAxis::Rate;
  } else if (args.axis == "rank") {
    cfg.axis = SweepAxis::Rank;
  } else {
    throw ConfigError("--axis must be rate or rank");
  }
  cfg.rates = args.rates;
  cfg.ranks = args.ranks;
  cfg.seeds = seed_list(common.seed, args.num_seeds);
  cfg.rows = args.large ? 500 : args.rows;
  cfg.cols = args.large ? 500 : args.cols;
  cfg.gamma = pen.gamma;
  cfg.fixed_rate = args.fixed_rate;
  cfg.fixed_rank = args.fixed_rank;
  cfg.solver = base_config(common);
  cfg.theory_penalties = !manual_penalty(common);
  cfg.rule = to_rule(pen);
  cfg.threads = common.threads;

  const std::vector<SweepRecord> records = run_sweep(cfg);
  const ColumnBlockLayout layout = mixed_layout(cfg.rows, cfg.cols);
  const fs::path out = common.out;
  fs::create_directories(out);
  io::atomic_write(out / "results.csv", sweep_csv(cfg, layout, records));
  const std::string stem = cfg.axis == SweepAxis::Rate ? "error_vs_rate.svg" : "error_vs_rank.svg";
  io::atomic_write(out / stem, render_svg(sweep_plot(cfg, layout, records)));
  std::cout << records.size() << " runs written to " << (out / "results.csv").string() << "\n";
  return 0;
}

// ---- bench-eig ----

int cmd_bench_eig(const Common& common, const PenaltyFlags& pen, const SweepArgs& args, int k) {
  EigBenchConfig cfg;
  cfg.ranks = args.ranks;
  cfg.seeds = seed_list(common.seed, args.num_seeds);
  cfg.rows = args.large ? 500 : args.rows;
  cfg.cols = args.large ? 500 : args.cols;
  cfg.gamma = pen.gamma;
  cfg.rate = args.fixed_rate;
  cfg.k = k;
  cfg.solver = base_config(common);
  cfg.rule = to_rule(pen);
  cfg.threads = common.threads;
  cfg.theory_penalties = !manual_penalty(common);
  const auto records = run_bench_eig(cfg);
  const fs::path out = common.out;
  fs::create_directories(out);
  io::atomic_write(out / "bench_eig.csv", bench_eig_csv(records));
  std::cout << records.size() << " paired runs written to " << (out / "bench_eig.csv").string() << "\n";
  return 0;
}

// ---- detect ----

int cmd_detect(const Common& common, const std::string& data, int group_width, double d_tol) {
  if (data.empty()) throw ConfigError("detect needs --data");
  if (group_width < 1) throw ConfigError("--group-width must be >= 1");
  const Matrix y = io::read_csv_matrix(data);
  DetectOptions opts;
  opts.d_tol = d_tol;
  std::string text;
  for (Eigen::Index start = 0; start < y.cols(); start += group_width) {
    const Eigen::Index width = std::min<Eigen::Index>(group_width, y.cols() - start);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(y.rows() * width));
    for (Eigen::Index j = start; j < start + width; ++j)
      for (Eigen::Index i = 0; i < y.rows(); ++i) values.push_back(y(i, j));
    const DetectionReport rep = detect(values, opts);
    text += rep.to_string() + "\n";
    std::cout << "columns " << start << "-" << start + width - 1 << ": " << rep.to_string() << "\n";
  }
  const fs::path out = common.out;
  fs::create_directories(out);
  io::atomic_write(out / "detect.txt", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-type low-rank matrix completion"};
  app.require_subcommand(1);

  Common common;
  PenaltyFlags pen;

  CLI::App* complete = app.add_subcommand("complete", "complete one observed matrix");
  CompleteArgs cargs;
  add_common(complete, common);
  add_penalty(complete, pen);
  complete->add_option("--instance", cargs.instance, "instance directory (theta.csv, y.csv, mask.csv, layout.txt, meta)");
  complete->add_option("--layout", cargs.layout, "layout file");
  complete->add_option("--data", cargs.data, "observed matrix CSV");
  complete->add_option("--mask", cargs.mask, "0/1 mask CSV (default: all observed)");
  complete->add_option("--truth", cargs.truth, "true canonical matrix CSV for error reporting");

  SweepArgs sargs;
  CLI::App* simulate = app.add_subcommand("simulate", "sampling-rate or rank sweep on synthetic mixed data");
  add_common(simulate, common);
  add_penalty(simulate, pen);
  simulate->add_option("--axis", sargs.axis, "rate | rank");
  simulate->add_option("--rates", sargs.rates, "sampling rates for the rate sweep")->delimiter(',');
  simulate->add_option("--ranks", sargs.ranks, "ranks for the rank sweep")->delimiter(',');
  simulate->add_option("--num-seeds", sargs.num_seeds, "seeds seed, seed+1, ...");
  simulate->add_option("--rows", sargs.rows);
  simulate->add_option("--cols", sargs.cols);
  simulate->add_option("--fixed-rate", sargs.fixed_rate, "rate used by the rank sweep");
  simulate->add_option("--fixed-rank", sargs.fixed_rank, "rank used by the rate sweep");
  simulate->add_flag("--large", sargs.large, "500 x 500 instances");

  SweepArgs bargs;
  bargs.ranks = {2, 5};
  bargs.num_seeds = 1;
  int trunc_k = 0;
  CLI::App* bench = app.add_subcommand("bench-eig", "full vs truncated eigensolver on the same instances");
  add_common(bench, common);
  add_penalty(bench, pen);
  bench->add_option("--ranks", bargs.ranks)->delimiter(',');
  bench->add_option("--num-seeds", bargs.num_seeds);
  bench->add_option("--rows", bargs.rows);
  bench->add_option("--cols", bargs.cols);
  bench->add_option("--rate", bargs.fixed_rate);
  bench->add_option("--k", trunc_k, "truncation size (0: ceil(dim / 10))");
  bench->add_flag("--large", bargs.large, "500 x 500 instances");

  std::string detect_data;
  int group_width = 1;
  double d_tol = 0.5;
  CLI::App* detect_cmd = app.add_subcommand("detect", "guess the distribution of each column group");
  add_common(detect_cmd, common);
  detect_cmd->add_option("--data", detect_data, "CSV matrix");
  detect_cmd->add_option("--group-width", group_width, "columns pooled per report line");
  detect_cmd->add_option("--d-tol", d_tol, "Poisson dispersion band half-width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config_file(active, common.config);
    if (active == complete) return cmd_complete(common, pen, cargs);
    if (active == simulate) return cmd_simulate(common, pen, sargs);
    if (active == bench) return cmd_bench_eig(common, pen, bargs, trunc_k);
    return cmd_detect(common, detect_data, group_width, d_tol);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const CLI::Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    // ConfigError, InsufficientDataError
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
