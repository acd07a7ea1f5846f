#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tailsampler/linalg.hpp"

namespace tailsampler {

enum class OuterLoss { Identity, Excess, Square };

std::string_view to_string(OuterLoss outer);

struct ReluLayer {
  Matrix A;
  Vector b;
};

/// Feed-forward ReLU network followed by a scalar readout and outer loss:
///   Phi = L_K, L_k = (A_k L_{k-1} - b_k)^+, L_0 = (x, v)
///   value = outer(theta^T Phi + theta_0)
/// The input is the factor vector x followed by `covariate_dim` covariates.
class ReluNetwork {
public:
  ReluNetwork(std::vector<ReluLayer> layers, Vector readout, double readout_bias = 0.0,
              OuterLoss outer = OuterLoss::Identity, double outer_level = 0.0,
              std::size_t covariate_dim = 0);

  /// Builds a network from a flat parameter array laid out as
  /// A_1 (row-major), b_1, ..., A_K, b_K, theta, theta_0.
  /// `widths` = {input, n_1, ..., n_K}.
  static ReluNetwork from_flat(const std::vector<double> &params,
                               const std::vector<std::size_t> &widths,
                               OuterLoss outer = OuterLoss::Identity, double outer_level = 0.0,
                               std::size_t covariate_dim = 0);
  static std::size_t flat_size(const std::vector<std::size_t> &widths);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t factor_dim() const { return input_dim_ - covariate_dim_; }
  std::size_t covariate_dim() const { return covariate_dim_; }
  const std::vector<ReluLayer> &layers() const { return layers_; }
  OuterLoss outer() const { return outer_; }

  /// theta^T Phi(x, v) + theta_0, before the outer loss.
  double score(const Vector &x, const Vector &v) const;
  double eval(const Vector &x) const;
  double eval(const Vector &x, const Vector &v) const;

  /// Limit of score(n x, v) / n: biases, covariates and theta_0 dropped.
  double limit_score(const Vector &x) const;
  /// Limit of eval(n x) / n^rho.
  double limit_eval(const Vector &x) const;
  /// Homogeneity order: 1 for identity and excess, 2 for square.
  double rho() const { return outer_ == OuterLoss::Square ? 2.0 : 1.0; }

private:
  double apply_outer(double s) const;

  std::vector<ReluLayer> layers_;
  Vector readout_;
  double readout_bias_;
  OuterLoss outer_;
  double outer_level_;
  std::size_t covariate_dim_;
  std::size_t input_dim_;
};

/// Reads whitespace/comma separated numbers; '#' starts a comment.
std::vector<double> read_flat_weights(const std::string &path);

} // namespace tailsampler
