#include "mixedmc/expfam.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "mixedmc/errors.hpp"

namespace mixedmc {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_token(Kind kind) {
  switch (kind) {
    case Kind::Gaussian: return "gaussian";
    case Kind::Bernoulli: return "bernoulli";
    case Kind::Poisson: return "poisson";
    case Kind::Gamma: return "gamma";
    case Kind::NegBin: return "negbin";
  }
  return "unknown";
}

Kind kind_from_token(std::string_view token) {
  if (token == "gaussian") return Kind::Gaussian;
  if (token == "bernoulli") return Kind::Bernoulli;
  if (token == "poisson") return Kind::Poisson;
  if (token == "gamma") return Kind::Gamma;
  if (token == "negbin") return Kind::NegBin;
  throw ConfigError("unknown distribution kind '" + std::string(token) + "'");
}

ExpFamModel ExpFamModel::gaussian(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ConfigError("gaussian variance must be > 0");
  return {Kind::Gaussian, variance};
}

ExpFamModel ExpFamModel::bernoulli() { return {Kind::Bernoulli, 0.0}; }

ExpFamModel ExpFamModel::poisson() { return {Kind::Poisson, 0.0}; }

ExpFamModel ExpFamModel::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw ConfigError("gamma shape must be > 0");
  return {Kind::Gamma, shape};
}

ExpFamModel ExpFamModel::negbin(double successes) {
  if (!(successes > 0.0) || !std::isfinite(successes)) throw ConfigError("negbin success count must be > 0");
  return {Kind::NegBin, successes};
}

ExpFamModel ExpFamModel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const Kind kind = kind_from_token(spec.substr(0, colon));
  const bool has_value = colon != std::string_view::npos;
  const double value = has_value ? parse_double(spec.substr(colon + 1), "nuisance parameter") : 0.0;
  switch (kind) {
    case Kind::Gaussian: return gaussian(has_value ? value : 1.0);
    case Kind::Bernoulli:
    case Kind::Poisson:
      if (has_value) throw ConfigError(std::string(to_token(kind)) + " takes no nuisance parameter");
      return kind == Kind::Bernoulli ? bernoulli() : poisson();
    case Kind::Gamma:
      if (!has_value) throw ConfigError("gamma requires a shape, e.g. gamma:2");
      return gamma(value);
    case Kind::NegBin:
      if (!has_value) throw ConfigError("negbin requires a success count, e.g. negbin:2");
      return negbin(value);
  }
  throw ConfigError("unreachable kind");
}

std::string ExpFamModel::to_string() const {
  std::string out(to_token(kind_));
  if (kind_ == Kind::Bernoulli || kind_ == Kind::Poisson) return out;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), nuisance_);
  out += ':';
  out.append(buf, ptr);
  return out;
}

bool ExpFamModel::in_domain(double theta) const {
  if (!std::isfinite(theta)) return false;
  return negative_domain() ? theta < 0.0 : true;
}

double ExpFamModel::upper_limit() const {
  return negative_domain() ? -kDomainGuard : std::numeric_limits<double>::infinity();
}

void ExpFamModel::check_domain(double theta) const {
  if (!in_domain(theta)) {
    throw DomainError(std::string(to_token(kind_)) + ": canonical parameter " + std::to_string(theta) +
                      " outside the natural domain");
  }
}

double ExpFamModel::log_partition(double theta) const {
  check_domain(theta);
  switch (kind_) {
    case Kind::Gaussian: return 0.5 * nuisance_ * theta * theta;
    case Kind::Bernoulli: return softplus(theta);
    case Kind::Poisson: return std::exp(theta);
    case Kind::Gamma: return -nuisance_ * std::log(-theta);
    case Kind::NegBin: return -nuisance_ * std::log(-std::expm1(theta));
  }
  return 0.0;
}

double ExpFamModel::mean_map(double theta) const {
  check_domain(theta);
  switch (kind_) {
    case Kind::Gaussian: return nuisance_ * theta;
    case Kind::Bernoulli: return sigmoid(theta);
    case Kind::Poisson: return std::exp(theta);
    case Kind::Gamma: return -nuisance_ / theta;
    case Kind::NegBin: return -nuisance_ * std::exp(theta) / std::expm1(theta);
  }
  return 0.0;
}

double ExpFamModel::curvature(double theta) const {
  check_domain(theta);
  switch (kind_) {
    case Kind::Gaussian: return nuisance_;
    case Kind::Bernoulli: {
      const double p = sigmoid(theta);
      return p * (1.0 - p);
    }
    case Kind::Poisson: return std::exp(theta);
    case Kind::Gamma: return nuisance_ / (theta * theta);
    case Kind::NegBin: {
      const double q = std::expm1(theta);
      return nuisance_ * std::exp(theta) / (q * q);
    }
  }
  return 0.0;
}

double ExpFamModel::canonical_from_mean(double mean) const {
  const auto reject = [&] {
    throw DomainError(std::string(to_token(kind_)) + ": mean " + std::to_string(mean) + " outside the mean domain");
  };
  if (!std::isfinite(mean)) reject();
  switch (kind_) {
    case Kind::Gaussian: return mean / nuisance_;
    case Kind::Bernoulli:
      if (!(mean > 0.0 && mean < 1.0)) reject();
      return std::log(mean / (1.0 - mean));
    case Kind::Poisson:
      if (!(mean > 0.0)) reject();
      return std::log(mean);
    case Kind::Gamma:
      if (!(mean > 0.0)) reject();
      return -nuisance_ / mean;
    case Kind::NegBin:
      if (!(mean > 0.0)) reject();
      return std::log(mean / (mean + nuisance_));
  }
  return 0.0;
}

double ExpFamModel::nll_term(double y, double theta) const {
  if (!std::isfinite(y)) throw DomainError("observation must be finite");
  return log_partition(theta) - y * theta;
}

double ExpFamModel::bregman(double x, double y) const {
  if (kind_ == Kind::Gaussian) {
    check_domain(x);
    check_domain(y);
    return 0.5 * nuisance_ * (x - y) * (x - y);
  }
  const double d = log_partition(x) - log_partition(y) - (x - y) * mean_map(y);
  return d > 0.0 ? d : 0.0;
}

double ExpFamModel::sample(double theta, Rng& rng) const {
  check_domain(theta);
  switch (kind_) {
    case Kind::Gaussian: {
      std::normal_distribution<double> dist(nuisance_ * theta, std::sqrt(nuisance_));
      return dist(rng);
    }
    case Kind::Bernoulli: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      return unif(rng) < sigmoid(theta) ? 1.0 : 0.0;
    }
    case Kind::Poisson: {
      std::poisson_distribution<long long> dist(std::exp(theta));
      return static_cast<double>(dist(rng));
    }
    case Kind::Gamma: {
      // shape alpha, rate -theta
      std::gamma_distribution<double> dist(nuisance_, -1.0 / theta);
      return dist(rng);
    }
    case Kind::NegBin: {
      // Poisson-Gamma mixture: lambda ~ Gamma(r, e^theta / (1 - e^theta)).
      const double odds = -std::exp(theta) / std::expm1(theta);
      std::gamma_distribution<double> mix(nuisance_, odds);
      const double lambda = mix(rng);
      if (lambda <= 0.0) return 0.0;
      std::poisson_distribution<long long> dist(lambda);
      return static_cast<double>(dist(rng));
    }
  }
  return 0.0;
}

CurvatureBounds curvature_bounds(const ExpFamModel& model, double gamma, double K,
                                 std::optional<double> negative_upper) {
  if (!(gamma > 0.0) || !(K > 0.0)) throw ConfigError("curvature_bounds: gamma and K must be > 0");
  const double s = gamma + 1.0 / K;
  CurvatureBounds out{0.0, 0.0, gamma, K};
  const double r = model.nuisance();
  switch (model.kind()) {
    case Kind::Gaussian:
      out.lower = out.upper = r;
      break;
    case Kind::Bernoulli: {
      // Binomial row with N = 1.
      const double e = std::exp(s);
      out.lower = std::exp(-s) / ((1.0 + e) * (1.0 + e));
      out.upper = 0.25;
      break;
    }
    case Kind::Poisson:
      out.lower = std::exp(-s);
      out.upper = std::exp(s);
      break;
    case Kind::Gamma:
    case Kind::NegBin: {
      const double hi = negative_upper.value_or(-kDomainGuard);
      if (!(hi < 0.0) || !(hi > -s)) {
        throw ConfigError("curvature_bounds: negative range upper end must lie in (-(gamma + 1/K), 0)");
      }
      if (model.kind() == Kind::Gamma) {
        out.lower = r / (s * s);
        const double m = std::min(s, -hi);
        out.upper = r / (m * m);
      } else {
        const double lo_q = -std::expm1(-s);
        out.lower = r * std::exp(-s) / (lo_q * lo_q);
        const double hi_q = -std::expm1(hi);
        out.upper = r * std::exp(hi) / (hi_q * hi_q);
      }
      break;
    }
  }
  return out;
}

}  // namespace mixedmc
