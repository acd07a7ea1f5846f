#include "tailsampler/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tailsampler {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Mills ratio R(x) = (1 - Phi(x)) / phi(x) by continued fraction, x > 0.
double mills_ratio(double x) {
  // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    if (std::fabs(d) < tiny)
      d = tiny;
    c = x + k / c;
    if (std::fabs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      break;
  }
  return 1.0 / f;
}

// Acklam's coefficients for the lower tail and central region.
constexpr double a_coef[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double b_coef[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
constexpr double c_coef[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
constexpr double d_coef[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

double acklam(double p) {
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c_coef[0] * q + c_coef[1]) * q + c_coef[2]) * q + c_coef[3]) * q +
             c_coef[4]) * q + c_coef[5]) /
           ((((d_coef[0] * q + d_coef[1]) * q + d_coef[2]) * q + d_coef[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a_coef[0] * r + a_coef[1]) * r + a_coef[2]) * r + a_coef[3]) * r +
             a_coef[4]) * r + a_coef[5]) * q /
           (((((b_coef[0] * r + b_coef[1]) * r + b_coef[2]) * r + b_coef[3]) * r +
             b_coef[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c_coef[0] * q + c_coef[1]) * q + c_coef[2]) * q + c_coef[3]) * q +
            c_coef[4]) * q + c_coef[5]) /
         ((((d_coef[0] * q + d_coef[1]) * q + d_coef[2]) * q + d_coef[3]) * q + 1.0);
}

// Quantile for p <= 0.5, refined against the lower-tail cdf (no cancellation).
double lower_quantile(double p) {
  double x = acklam(p);
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

} // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_normal_sf(double x) {
  if (x < 5.0)
    return std::log(normal_sf(x));
  return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio(x));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  if (p <= 0.5)
    return lower_quantile(p);
  return -lower_quantile(1.0 - p);
}

double normal_isf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_isf: p must lie in (0,1)");
  if (p <= 0.5)
    return -lower_quantile(p);
  return lower_quantile(1.0 - p);
}

double normal_isf_log(double log_p) {
  if (!(log_p < 0.0))
    throw std::domain_error("normal_isf_log: log_p must be negative");
  if (log_p > -700.0) {
    const double p = std::exp(log_p);
    if (p > 0.5)
      return normal_quantile(-std::expm1(log_p));
    return normal_isf(p);
  }
  // Far tail: Newton on log(1 - Phi(x)) - log_p, derivative -1/R(x).
  const double t = -2.0 * log_p;
  double x = std::sqrt(t - std::log(2.0 * std::numbers::pi * t));
  for (int it = 0; it < 50; ++it) {
    const double f = log_normal_sf(x) - log_p;
    const double step = f * mills_ratio(x);
    x += step;
    if (std::fabs(step) <= 1e-15 * x)
      break;
  }
  return x;
}

double log_gamma_q(double a, double x) {
  if (!(a > 0.0))
    throw std::domain_error("log_gamma_q: shape must be positive");
  if (x <= 0.0)
    return 0.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) = e^{-x} x^a / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-17)
        break;
    }
    const double p = std::exp(log_prefix + std::log(sum));
    return std::log1p(-p);
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny)
      d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16)
      break;
  }
  return log_prefix + std::log(h);
}

double softplus(double x) {
  if (x > 0.0)
    return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

} // namespace tailsampler
