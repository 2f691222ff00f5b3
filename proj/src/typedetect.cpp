#include "mixedmc/typedetect.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <optional>

#include "mixedmc/errors.hpp"
#include "mixedmc/io.hpp"

namespace mixedmc {

std::vector<double> DetectOptions::default_mgf_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(-0.2 + 0.04 * k);
  return grid;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // divides by n
  double min = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.min = *std::min_element(v.begin(), v.end());
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size());
  return m;
}

bool is_integer(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

void require_support(bool ok, Kind kind) {
  if (!ok) throw DomainError("sample outside the support of " + std::string(to_token(kind)));
}

double gamma_shape_mle(const std::vector<double>& v, double mean) {
  double mean_log = 0.0;
  for (double x : v) mean_log += std::log(x);
  mean_log /= static_cast<double>(v.size());
  const double s = std::log(mean) - mean_log;
  if (!(s > 1e-12)) return 1e8;  // constant sample: shape -> infinity
  double a = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(a) - boost::math::digamma(a) - s;
    const double fp = 1.0 / a - boost::math::trigamma(a);
    double next = a - f / fp;
    if (!(next > 0.0)) next = 0.5 * a;
    if (std::abs(next - a) <= 1e-12 * a) return next;
    a = next;
  }
  return a;
}

// Profile log-likelihood of NegBin(r) with p = r / (r + mean), up to terms free of r.
double negbin_profile(const std::vector<double>& v, double mean, double r) {
  const double p = r / (r + mean);
  double ll = 0.0;
  for (double x : v) ll += std::lgamma(x + r) - std::lgamma(r);
  const double n = static_cast<double>(v.size());
  return ll + n * r * std::log(p) + n * mean * std::log1p(-p);
}

double negbin_r_mle(const std::vector<double>& v, double mean) {
  constexpr double kLogLo = -3.0;  // r in [1e-3, 1e5]
  constexpr double kLogHi = 5.0;
  constexpr int kSteps = 81;
  const double h = (kLogHi - kLogLo) / (kSteps - 1);
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSteps; ++k) {
    const double ll = negbin_profile(v, mean, std::pow(10.0, kLogLo + h * k));
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  // Golden-section refine on log10 r between the neighbours of the grid maximum.
  double a = kLogLo + h * std::max(best - 1, 0);
  double b = kLogLo + h * std::min(best + 1, kSteps - 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  const auto f = [&](double lr) { return negbin_profile(v, mean, std::pow(10.0, lr)); };
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-8) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::pow(10.0, 0.5 * (a + b));
}

// Right end of the MGF domain; +inf when the MGF is entire.
double mgf_domain_end(const FitResult& fit) {
  switch (fit.model.kind()) {
    case Kind::Gamma: return 1.0 / fit.scale;
    case Kind::NegBin: return -std::log1p(-fit.prob);
    default: return std::numeric_limits<double>::infinity();
  }
}

double model_mgf(const FitResult& fit, double t) {
  const double m = fit.mean;
  switch (fit.model.kind()) {
    case Kind::Gaussian: return std::exp(m * t + 0.5 * fit.model.nuisance() * t * t);
    case Kind::Bernoulli: return 1.0 - fit.prob + fit.prob * std::exp(t);
    case Kind::Poisson: return std::exp(m * std::expm1(t));
    case Kind::Gamma: return std::pow(1.0 - fit.scale * t, -fit.model.nuisance());
    case Kind::NegBin: {
      const double p = fit.prob;
      return std::pow(p / (1.0 - (1.0 - p) * std::exp(t)), fit.model.nuisance());
    }
  }
  return 0.0;
}

int kind_rank(Kind k) { return static_cast<int>(k); }

bool admits(Kind kind, const Moments& m, bool binary, bool integers) {
  switch (kind) {
    case Kind::Gaussian: return true;
    case Kind::Bernoulli: return binary;
    case Kind::Poisson:
    case Kind::NegBin: return integers && m.min >= 0.0;
    case Kind::Gamma: return m.min > 0.0;
  }
  return false;
}

}  // namespace

std::string DetectionReport::to_string() const {
  std::string out = "kind=" + std::string(to_token(kind())) + " score=" + io::format_double(score) + " rules=";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i) out += ';';
    out += rules[i];
  }
  return out;
}

FitResult fit_mle(Kind kind, const std::vector<double>& values) {
  if (values.empty()) throw InsufficientDataError("fit_mle: no values");
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("fit_mle: non-finite value");
  }
  const Moments m = moments(values);
  FitResult fit;
  fit.mean = m.mean;
  switch (kind) {
    case Kind::Gaussian:
      fit.model = ExpFamModel::gaussian(std::max(m.var, 1e-12));
      break;
    case Kind::Bernoulli:
      require_support(std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0 || x == 1.0; }), kind);
      fit.model = ExpFamModel::bernoulli();
      fit.prob = m.mean;
      break;
    case Kind::Poisson:
      require_support(m.min >= 0.0, kind);
      fit.model = ExpFamModel::poisson();
      break;
    case Kind::Gamma: {
      require_support(m.min > 0.0, kind);
      const double shape = gamma_shape_mle(values, m.mean);
      fit.model = ExpFamModel::gamma(shape);
      fit.scale = m.mean / shape;
      break;
    }
    case Kind::NegBin: {
      require_support(m.min >= 0.0, kind);
      if (!(m.mean > 0.0)) throw DomainError("fit_mle: negbin needs a positive mean");
      const double r = negbin_r_mle(values, m.mean);
      fit.model = ExpFamModel::negbin(r);
      fit.prob = r / (r + m.mean);
      break;
    }
  }
  return fit;
}

double mgf_distance(const std::vector<double>& values, const FitResult& fit, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("mgf_distance: empty grid");
  if (values.empty()) throw InsufficientDataError("mgf_distance: no values");
  const double end = mgf_domain_end(fit);
  double sum = 0.0;
  int used = 0;
  for (double t : grid) {
    if (!(2.0 * t < end)) continue;
    double emp = 0.0;
    for (double x : values) emp += std::exp(t * x);
    emp /= static_cast<double>(values.size());
    const double diff = emp - model_mgf(fit, t);
    sum += diff * diff;
    ++used;
  }
  if (used == 0) throw ConfigError("mgf_distance: no grid point inside the MGF domain");
  const double d = sum / used;
  return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
}

DetectionReport detect(const std::vector<double>& values, const std::vector<Kind>& candidates,
                       const DetectOptions& options) {
  if (static_cast<int>(values.size()) < options.min_values) {
    throw InsufficientDataError("detect: need at least " + std::to_string(options.min_values) + " values, got " +
                                std::to_string(values.size()));
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("detect: non-finite value");
  }
  if (candidates.empty()) throw ConfigError("detect: empty candidate set");
  const auto allowed = [&](Kind k) { return std::find(candidates.begin(), candidates.end(), k) != candidates.end(); };

  const Moments m = moments(values);
  const bool binary = std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0 || x == 1.0; });
  const bool integers =
      std::all_of(values.begin(), values.end(), [&](double x) { return is_integer(x, options.int_tol); });

  DetectionReport rep;
  const auto settle = [&](Kind k) {
    rep.fit = fit_mle(k, values);
    rep.score = 0.0;
    return rep;
  };

  // Scores the admissible candidates among `pool` and keeps the smallest
  // distance; `scale` divides the sample first (scale-family comparison).
  const auto compare = [&](std::vector<Kind> pool, double scale) -> std::optional<DetectionReport> {
    std::sort(pool.begin(), pool.end(), [](Kind a, Kind b) { return kind_rank(a) < kind_rank(b); });
    std::vector<double> scaled = values;
    if (scale != 1.0)
      for (double& x : scaled) x /= scale;
    const Moments ms = moments(scaled);
    std::optional<double> best;
    for (Kind k : pool) {
      if (!allowed(k) || !admits(k, ms, binary, integers)) continue;
      const double d = mgf_distance(scaled, fit_mle(k, scaled), options.grid);
      if (!best || d < *best) {
        best = d;
        rep.fit = fit_mle(k, values);
      }
    }
    if (!best) return std::nullopt;
    rep.score = *best;
    return rep;
  };

  if (binary && allowed(Kind::Bernoulli)) {
    rep.rules.push_back("binary");
    return settle(Kind::Bernoulli);
  }
  if (integers && m.min >= 0.0 && m.mean > 0.0) {
    rep.rules.push_back("nonneg_integer");
    const double dispersion = m.var / m.mean;
    if (std::abs(dispersion - 1.0) <= options.d_tol && allowed(Kind::Poisson)) {
      rep.rules.push_back("dispersion_in_band");
      return settle(Kind::Poisson);
    }
    if (dispersion > 1.0 + options.d_tol && allowed(Kind::NegBin)) {
      rep.rules.push_back("overdispersed");
      return settle(Kind::NegBin);
    }
    if (dispersion < 1.0 - options.d_tol) {
      // No negative binomial is underdispersed.
      rep.rules.push_back("underdispersed");
      rep.rules.push_back("mgf_compare");
      if (auto r = compare({Kind::Gaussian, Kind::Poisson}, 1.0)) return *r;
    } else {
      rep.rules.push_back("candidate_excluded");
    }
  }
  if (m.min > 0.0 && !integers) {
    rep.rules.push_back("positive_real");
    rep.rules.push_back("mgf_compare");
    const double sd = std::sqrt(m.var);
    if (auto r = compare({Kind::Gaussian, Kind::Gamma}, sd > 0.0 ? sd : 1.0)) return *r;
  }
  if (allowed(Kind::Gaussian)) {
    rep.rules.push_back("default_gaussian");
    return settle(Kind::Gaussian);
  }
  rep.rules.push_back("mgf_compare_all");
  if (auto r = compare(candidates, 1.0)) return *r;
  throw DomainError("detect: no candidate admits the sample");
}

DetectionReport detect(const std::vector<double>& values, const DetectOptions& options) {
  return detect(values, {Kind::Gaussian, Kind::Bernoulli, Kind::Poisson, Kind::Gamma, Kind::NegBin}, options);
}

}  // namespace mixedmc
