#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <variant>
#include <vector>

#include "tailsampler/linalg.hpp"
#include "tailsampler/relu_network.hpp"

namespace tailsampler {

enum class LossKind {
  LinearPortfolio,
  PiecewiseAffine,
  PiecewiseQuadratic,
  ReluNetwork,
  DistributionNetwork,
  CreditRiskStructural
};

std::string_view to_string(LossKind kind);

/// Loans of a credit portfolio: per-type score networks W_j (factor inputs
/// followed by loan covariates), loan types (0-based), exposures, covariates
/// and the loss fraction q.
struct LoanBook {
  std::vector<ReluNetwork> W;
  std::vector<std::size_t> types;
  std::vector<double> exposures;
  std::vector<Vector> covariates;
  double q = 0.0;

  std::size_t loans() const { return types.size(); }
  std::size_t type_count() const { return W.size(); }
  void validate() const;
};

/// max over type subsets whose exposure reaches q * sum(e) of the minimum
/// per-type score. The collection of subsets is enumerated once.
class CreditStructure {
public:
  static constexpr std::size_t kMaxTypes = 12;

  explicit CreditStructure(LoanBook book);

  const LoanBook &book() const { return book_; }
  /// Bitmasks of the qualifying type subsets.
  const std::vector<std::uint32_t> &subsets() const { return subsets_; }

  /// Minimum of W_j(x, v_i) over the loans of each type (+inf if none).
  Vector type_minima(const Vector &x) const;
  double eval(const Vector &x) const;
  double limit_eval(const Vector &x) const;
  double max_min(const Vector &per_type) const;

private:
  LoanBook book_;
  std::vector<std::uint32_t> subsets_;
  // distinct covariate vectors per type
  std::vector<std::vector<Vector>> groups_;
};

/// Black-box loss L(x) with homogeneity order rho and a limit L*.
class LossModel {
public:
  static LossModel linear(Vector w);
  static LossModel piecewise_affine(std::vector<Vector> theta, std::vector<double> r);
  static LossModel piecewise_quadratic(std::vector<Matrix> Q, std::vector<Vector> c);
  static LossModel relu(ReluNetwork net);
  /// Excess-demand LP with fixed supply vector; the limit reported is the
  /// level-set function max_i x_i / theta_i with theta = supply / sum(supply).
  static LossModel distribution_network(Matrix A, Vector supply);
  static LossModel credit_structural(LoanBook book);

  LossKind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  double rho() const { return rho_; }
  bool has_limit() const { return true; }

  double eval(const Vector &x) const;
  /// L*(x). Positively homogeneous of degree rho on the nonnegative orthant.
  double limit_eval(const Vector &x) const;
  /// eval(n x) / n^rho, the fallback for losses without an analytic limit.
  double numeric_limit(const Vector &x, double n = 1e4) const;

  const CreditStructure *credit() const;

private:
  struct Linear {
    Vector w;
  };
  struct Affine {
    std::vector<Vector> theta;
    std::vector<double> r;
  };
  struct Quadratic {
    std::vector<Matrix> Q;
    std::vector<Vector> c;
  };
  struct Network {
    Matrix A;
    Vector supply;
    Vector theta;
  };
  using Impl = std::variant<Linear, Affine, Quadratic, ReluNetwork, Network, CreditStructure>;

  LossModel(LossKind kind, std::size_t dim, double rho, Impl impl);
  void check_dim(const Vector &x) const;

  LossKind kind_;
  std::size_t dim_;
  double rho_;
  Impl impl_;
};

} // namespace tailsampler
