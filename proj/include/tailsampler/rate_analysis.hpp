#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tailsampler/dependence.hpp"
#include "tailsampler/linalg.hpp"
#include "tailsampler/losses.hpp"
#include "tailsampler/marginals.hpp"

namespace tailsampler {

enum class RateKind { Independence, GaussianCopula, Clayton, Gumbel, StudentT };

std::string_view to_string(RateKind kind);

/// Rate function I of the standardized vector Y = Lambda(X) together with
/// the tail data (alpha, q*) that map y back to the X scale.
struct RateSpec {
  RateKind kind = RateKind::Independence;
  std::size_t d = 0;
  double theta = 0.0; ///< Clayton / Gumbel parameter
  double dof = 0.0;   ///< Student-t degrees of freedom
  Matrix R_inverse;   ///< Gaussian copula
  Vector alpha;
  Vector q_star;

  static RateSpec independence(std::size_t d);
  static RateSpec gaussian(const Matrix &R);
  static RateSpec clayton(std::size_t d, double theta);
  static RateSpec gumbel(std::size_t d, double theta);
  static RateSpec student_t(std::size_t d, double dof);
  /// Rate function of a copula implemented in the dependence module.
  static RateSpec for_copula(const Copula &copula);

  /// Attaches alpha and q* (defaults: ones).
  RateSpec &with_tails(Vector alpha_, Vector q_star_);
};

/// I(y) for y >= 0. Throws std::domain_error on a negative coordinate.
double rate_eval(const RateSpec &rs, const Vector &y);

double lambda_min(const std::vector<Marginal> &marginals, double x);

struct QStar {
  Vector q;
  Vector alpha;
  bool heavy = false;      ///< computed on the log scale
  bool converged = true;
  double max_rel_diff = 0.0; ///< disagreement between the two probe levels
};

/// q*_i = lim r_i(x)^{1/alpha_min}, r_i = Lambda_min / Lambda_i, evaluated at
/// two probe levels. With heavy-tailed marginals the log-scale hazards
/// Lambda(e^t) are used instead.
QStar q_star(const std::vector<Marginal> &marginals, double probe = 1e6,
             double probe_check = 1e7);

/// q* / |q*|_1. Throws std::runtime_error when q* did not converge.
Vector network_theta_star(const std::vector<Marginal> &marginals);

using LevelFn = std::function<double(const Vector &x)>;

struct IStar {
  double value = 0.0; ///< +inf when the level set is empty
  Vector y;           ///< minimizer
};

struct DirectionScan {
  Vector direction; ///< point of the unit simplex
  double c;         ///< minimal scaling with G(q* (c y)^{1/alpha}) >= 1
  double rate;      ///< c * I(direction)
};

/// Minimal c >= 0 with G(q* (c y)^{1/alpha}) >= 1 along the ray through y.
double ray_scale(const RateSpec &rs, const LevelFn &G, const Vector &direction);

/// Every point of the simplex grid with the given resolution (1/steps).
std::vector<DirectionScan> scan_directions(const RateSpec &rs, const LevelFn &G,
                                           std::size_t steps);

/// inf { I(y) : G(q* y^{1/alpha}) >= 1, y >= 0 } by a simplex grid search
/// followed by Nelder-Mead refinement over directions.
IStar exponent_Istar(const RateSpec &rs, const LevelFn &G);
/// Uses L* of the loss (or V* when `heavy` is set).
IStar exponent_Istar(const RateSpec &rs, const LossModel &lm, bool heavy = false);

/// V*(x) = lim n^{-1} log L*(e^{n x}) for the heavy-tailed level set.
LevelFn heavy_level_function(const LossModel &lm);

/// Grid resolution used by exponent_Istar in dimension d.
std::size_t default_grid_steps(std::size_t d);

} // namespace tailsampler
