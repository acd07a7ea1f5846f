#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "tailsampler/linalg.hpp"
#include "tailsampler/marginals.hpp"
#include "tailsampler/rng.hpp"

namespace tailsampler {

enum class CopulaKind { Independence, Gaussian, Clayton };

std::string_view to_string(CopulaKind kind);

/// Dependence structure of the standardized vector Y = Lambda(X), whose
/// coordinates are standard exponential.
///
/// Gaussian: Y_i = -log(1 - Phi(Z_i)) with Z ~ N(0, R).
/// Clayton: the Clayton copula placed on the survival values U_i = exp(-Y_i),
/// so that large Y coordinates cluster together.
class Copula {
public:
  static Copula independence(std::size_t d);
  static Copula gaussian(const Matrix &R);
  static Copula clayton(std::size_t d, double theta);

  CopulaKind kind() const { return kind_; }
  std::size_t dimension() const { return d_; }
  double theta() const { return theta_; }
  const Matrix &correlation() const { return R_; }
  const Matrix &cholesky_factor() const { return L_; }

  /// Gaussian only: -0.5 log det R - 0.5 g^T (R^{-1} - I) g.
  double log_density_scores(const Vector &g) const;
  /// Clayton only: log copula density in terms of the standardized y.
  double log_density_standard(const Vector &y) const;

private:
  Copula(CopulaKind kind, std::size_t d);

  CopulaKind kind_;
  std::size_t d_;
  double theta_ = 0.0;
  Matrix R_;
  Matrix L_;
  Matrix precision_minus_identity_;
  double log_det_ = 0.0;
};

class JointModel {
public:
  JointModel(std::vector<Marginal> marginals, Copula copula);

  std::size_t dimension() const { return marginals_.size(); }
  const std::vector<Marginal> &marginals() const { return marginals_; }
  const Copula &copula() const { return copula_; }

  Vector sample_joint(RandomStream &stream) const;
  /// log f_X(x). Throws std::domain_error when x is outside the support.
  double log_density_joint(const Vector &x) const;
  bool in_support(const Vector &x) const;
  /// Lower corner of the support (0 for coordinates unbounded below). The
  /// sampler transform acts on x - origin so it maps the support onto itself.
  const Vector &origin() const { return origin_; }

  /// y = Lambda(x) componentwise, and its inverse.
  Vector to_standard(const Vector &x) const;
  Vector from_standard(const Vector &y) const;

private:
  std::vector<Marginal> marginals_;
  Copula copula_;
  Vector origin_;
};

} // namespace tailsampler
