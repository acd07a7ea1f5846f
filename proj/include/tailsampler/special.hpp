#pragma once

namespace tailsampler {

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate in the far right tail.
double normal_sf(double x);

/// log(1 - Phi(x)). Uses erfc for moderate x and the Mills-ratio continued
/// fraction beyond, so the result stays finite and accurate for x >> 38.
double log_normal_sf(double x);

/// Phi^{-1}(p) for p in (0,1): Acklam's rational approximation followed by one
/// Halley step against the erfc-based cdf. Throws std::domain_error otherwise.
double normal_quantile(double p);

/// Inverse of the upper tail: x with 1 - Phi(x) = p.
double normal_isf(double p);

/// x with log(1 - Phi(x)) = log_p, for any log_p < 0 (no underflow).
double normal_isf_log(double log_p);

/// log Q(a, x), the regularized upper incomplete gamma function, computed by
/// series (x < a + 1) or Lentz continued fraction (x >= a + 1).
double log_gamma_q(double a, double x);

/// log(1 + e^x) without overflow.
double softplus(double x);
/// 1 / (1 + e^{-x}) without overflow.
double logistic(double x);

} // namespace tailsampler
