#include "tailsampler/marginals.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tailsampler/special.hpp"

namespace tailsampler {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Phi^{-1}(1e-12); Normal hazard queries below this score are rejected.
constexpr double kNormalLowestScore = -7.034483825301131;

// -log(1 - Phi(z)) with full relative accuracy on both sides of zero.
double normal_hazard_of_score(double z) {
  if (z < 0.0)
    return -std::log1p(-normal_cdf(z));
  return -log_normal_sf(z);
}

// Inverse of normal_hazard_of_score.
double score_of_normal_hazard(double y) {
  if (y <= 0.0)
    return -std::numeric_limits<double>::infinity();
  if (y < std::numbers::ln2)
    return normal_quantile(-std::expm1(-y));
  return normal_isf_log(-y);
}

void require_positive(double v, const char *what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("marginal parameter must be positive: ") + what);
}

} // namespace

std::string_view to_string(MarginalKind kind) {
  switch (kind) {
  case MarginalKind::Exponential: return "exponential";
  case MarginalKind::Weibull: return "weibull";
  case MarginalKind::Normal: return "normal";
  case MarginalKind::Gamma: return "gamma";
  case MarginalKind::Lognormal: return "lognormal";
  case MarginalKind::Pareto: return "pareto";
  }
  return "unknown";
}

Marginal::Marginal(MarginalKind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

Marginal Marginal::exponential(double rate) {
  require_positive(rate, "rate");
  return Marginal(MarginalKind::Exponential, rate, 0.0);
}

Marginal Marginal::weibull(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  return Marginal(MarginalKind::Weibull, shape, scale);
}

Marginal Marginal::normal(double mean, double sd) {
  if (!std::isfinite(mean))
    throw std::invalid_argument("marginal parameter must be finite: mean");
  require_positive(sd, "sd");
  return Marginal(MarginalKind::Normal, mean, sd);
}

Marginal Marginal::gamma(double shape, double rate) {
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  return Marginal(MarginalKind::Gamma, shape, rate);
}

Marginal Marginal::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu))
    throw std::invalid_argument("marginal parameter must be finite: mu");
  require_positive(sigma, "sigma");
  return Marginal(MarginalKind::Lognormal, mu, sigma);
}

Marginal Marginal::pareto(double index, double scale) {
  require_positive(index, "index");
  require_positive(scale, "scale");
  return Marginal(MarginalKind::Pareto, index, scale);
}

double Marginal::alpha() const {
  switch (kind_) {
  case MarginalKind::Exponential: return 1.0;
  case MarginalKind::Weibull: return p1_;
  case MarginalKind::Normal: return 2.0;
  case MarginalKind::Gamma: return 1.0;
  case MarginalKind::Lognormal: return 2.0;
  case MarginalKind::Pareto: return 1.0;
  }
  return 1.0;
}

bool Marginal::heavy_tailed() const {
  return kind_ == MarginalKind::Lognormal || kind_ == MarginalKind::Pareto;
}

double Marginal::x0() const { return kind_ == MarginalKind::Pareto ? p2_ : 0.0; }

double Marginal::support_lower() const {
  switch (kind_) {
  case MarginalKind::Normal: return -std::numeric_limits<double>::infinity();
  case MarginalKind::Pareto: return p2_;
  default: return 0.0;
  }
}

bool Marginal::in_support(double x) const {
  switch (kind_) {
  case MarginalKind::Exponential: return x >= 0.0 && std::isfinite(x);
  case MarginalKind::Normal: return std::isfinite(x);
  case MarginalKind::Pareto: return x >= p2_ && std::isfinite(x);
  default: return x > 0.0 && std::isfinite(x);
  }
}

void Marginal::check_domain(double x, const char *what) const {
  if (std::isnan(x))
    throw std::domain_error(std::string(what) + ": NaN argument");
  if (kind_ == MarginalKind::Normal) {
    if ((x - p1_) / p2_ < kNormalLowestScore)
      throw std::domain_error(std::string(what) +
                              ": normal argument below the 1e-12 quantile");
    return;
  }
  if (x < support_lower())
    throw std::domain_error(std::string(what) + ": argument below the support of " +
                            std::string(to_string(kind_)));
}

double Marginal::hazard(double x) const {
  check_domain(x, "hazard");
  switch (kind_) {
  case MarginalKind::Exponential: return p1_ * x;
  case MarginalKind::Weibull: return std::pow(x / p2_, p1_);
  case MarginalKind::Normal: return normal_hazard_of_score((x - p1_) / p2_);
  case MarginalKind::Gamma: return -log_gamma_q(p1_, p2_ * x);
  case MarginalKind::Lognormal:
    if (x == 0.0)
      return 0.0;
    return normal_hazard_of_score((std::log(x) - p1_) / p2_);
  case MarginalKind::Pareto: return p1_ * std::log(x / p2_);
  }
  return 0.0;
}

double Marginal::hazard_inverse(double y) const {
  if (!(y >= 0.0))
    throw std::domain_error("hazard_inverse: argument must be non-negative");
  switch (kind_) {
  case MarginalKind::Exponential: return y / p1_;
  case MarginalKind::Weibull: return p2_ * std::pow(y, 1.0 / p1_);
  case MarginalKind::Normal: return p1_ + p2_ * score_of_normal_hazard(y);
  case MarginalKind::Lognormal:
    if (y == 0.0)
      return 0.0;
    return std::exp(p1_ + p2_ * score_of_normal_hazard(y));
  case MarginalKind::Pareto: return p2_ * std::exp(y / p1_);
  case MarginalKind::Gamma: break;
  }

  // Gamma: solve -log Q(a, t) = y in t = rate * x by safeguarded Newton.
  if (y == 0.0)
    return 0.0;
  const double a = p1_;
  auto lam = [a](double t) { return -log_gamma_q(a, t); };
  double lo = 0.0;
  double hi = std::max(1.0, y + a);
  while (lam(hi) < y)
    hi *= 2.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = lam(t) - y;
    if (std::fabs(f) <= 1e-15 * std::max(1.0, y))
      break;
    if (f < 0.0)
      lo = t;
    else
      hi = t;
    // hazard rate in t units: exp(log density + Lambda)
    const double log_dens = (a - 1.0) * std::log(t) - t - std::lgamma(a);
    const double rate = std::exp(log_dens + lam(t));
    double next = t - f / rate;
    if (!(next > lo && next < hi) || !std::isfinite(next))
      next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * hi)
      break;
    t = next;
  }
  return t / p2_;
}

double Marginal::log_hazard_inverse(double y) const {
  if (!(y >= 0.0))
    throw std::domain_error("log_hazard_inverse: argument must be non-negative");
  switch (kind_) {
  case MarginalKind::Pareto: return std::log(p2_) + y / p1_;
  case MarginalKind::Lognormal: return p1_ + p2_ * score_of_normal_hazard(y);
  default: return std::log(hazard_inverse(y));
  }
}

double Marginal::hazard_log_scale(double t) const {
  switch (kind_) {
  case MarginalKind::Pareto:
    if (t < std::log(p2_))
      throw std::domain_error("hazard_log_scale: argument below the support of pareto");
    return p1_ * (t - std::log(p2_));
  case MarginalKind::Lognormal: return normal_hazard_of_score((t - p1_) / p2_);
  default: return hazard(std::exp(t));
  }
}

double Marginal::log_density(double x) const {
  if (!in_support(x))
    throw std::domain_error("log_density: argument outside the support of " +
                            std::string(to_string(kind_)));
  switch (kind_) {
  case MarginalKind::Exponential: return std::log(p1_) - p1_ * x;
  case MarginalKind::Weibull: {
    const double r = x / p2_;
    return std::log(p1_ / p2_) + (p1_ - 1.0) * std::log(r) - std::pow(r, p1_);
  }
  case MarginalKind::Normal: {
    const double z = (x - p1_) / p2_;
    return -0.5 * z * z - std::log(p2_) - kLogSqrt2Pi;
  }
  case MarginalKind::Gamma:
    return p1_ * std::log(p2_) + (p1_ - 1.0) * std::log(x) - p2_ * x - std::lgamma(p1_);
  case MarginalKind::Lognormal: {
    const double z = (std::log(x) - p1_) / p2_;
    return -0.5 * z * z - std::log(x * p2_) - kLogSqrt2Pi;
  }
  case MarginalKind::Pareto:
    return std::log(p1_) + p1_ * std::log(p2_) - (p1_ + 1.0) * std::log(x);
  }
  return 0.0;
}

double Marginal::hazard_rate(double x) const {
  if (!in_support(x))
    throw std::domain_error("hazard_rate: argument outside the support of " +
                            std::string(to_string(kind_)));
  switch (kind_) {
  case MarginalKind::Exponential: return p1_;
  case MarginalKind::Weibull: return p1_ / p2_ * std::pow(x / p2_, p1_ - 1.0);
  case MarginalKind::Pareto: return p1_ / x;
  case MarginalKind::Normal:
    return std::exp(log_density(x) + normal_hazard_of_score((x - p1_) / p2_));
  default: return std::exp(log_density(x) + hazard(x));
  }
}

double Marginal::normal_score(double x) const {
  switch (kind_) {
  case MarginalKind::Normal: return (x - p1_) / p2_;
  case MarginalKind::Lognormal:
    if (!(x > 0.0))
      throw std::domain_error("normal_score: lognormal argument must be positive");
    return (std::log(x) - p1_) / p2_;
  default: return score_of_normal_hazard(hazard(x));
  }
}

double Marginal::from_normal_score(double z) const {
  switch (kind_) {
  case MarginalKind::Normal: return p1_ + p2_ * z;
  case MarginalKind::Lognormal: return std::exp(p1_ + p2_ * z);
  default: return hazard_inverse(normal_hazard_of_score(z));
  }
}

double Marginal::sample(RandomStream &stream) const { return hazard_inverse(stream.exponential()); }

} // namespace tailsampler
