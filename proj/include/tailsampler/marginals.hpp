#pragma once

#include <string>
#include <string_view>

#include "tailsampler/rng.hpp"

namespace tailsampler {

enum class MarginalKind { Exponential, Weibull, Normal, Gamma, Lognormal, Pareto };

std::string_view to_string(MarginalKind kind);

/// Univariate marginal described through its cumulative hazard
/// Lambda(x) = -log P(X > x) and the inverse q = Lambda^{-1}.
///
/// Light-tailed kinds (Exponential, Weibull, Normal, Gamma) report the
/// regular-variation index of Lambda as `alpha()`. Heavy-tailed kinds
/// (Lognormal, Pareto) report the index of Lambda(e^t) instead, and
/// `heavy_tailed()` is true.
///
/// Immutable after construction.
class Marginal {
public:
  static Marginal exponential(double rate = 1.0);
  static Marginal weibull(double shape, double scale = 1.0);
  static Marginal normal(double mean = 0.0, double sd = 1.0);
  static Marginal gamma(double shape, double rate = 1.0);
  static Marginal lognormal(double mu = 0.0, double sigma = 1.0);
  static Marginal pareto(double index, double scale = 1.0);

  MarginalKind kind() const { return kind_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

  double alpha() const;
  bool heavy_tailed() const;
  /// Start of the region where the hazard is monotone.
  double x0() const;
  /// Lower end of the support (-infinity for Normal).
  double support_lower() const;
  /// True when x is in the support interior, where the density is finite.
  bool in_support(double x) const;

  /// Lambda(x). Throws std::domain_error below the support (and, for Normal,
  /// below the 1e-12 quantile).
  double hazard(double x) const;
  /// q(y) = Lambda^{-1}(y) for y >= 0.
  double hazard_inverse(double y) const;
  /// log q(y), finite even where q(y) overflows (heavy tails).
  double log_hazard_inverse(double y) const;
  /// Lambda(e^t); the heavy-tail hazard on the log scale.
  double hazard_log_scale(double t) const;

  double log_density(double x) const;
  /// lambda(x) = f(x) / (1 - F(x)).
  double hazard_rate(double x) const;

  /// z with 1 - Phi(z) = P(X > x); the Gaussian-copula score of x.
  double normal_score(double x) const;
  /// Inverse of normal_score.
  double from_normal_score(double z) const;

  /// q(E) with E standard exponential, so Lambda(sample) ~ Exp(1) exactly.
  double sample(RandomStream &stream) const;

private:
  Marginal(MarginalKind kind, double p1, double p2);
  void check_domain(double x, const char *what) const;

  MarginalKind kind_;
  double p1_;
  double p2_;
};

} // namespace tailsampler
