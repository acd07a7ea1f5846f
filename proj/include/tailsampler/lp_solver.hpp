#pragma once

#include <string_view>

#include "tailsampler/linalg.hpp"

namespace tailsampler {

enum class LpStatus { Optimal, Unbounded };

std::string_view to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double value = 0.0;
  Vector y;    ///< primal optimum (Optimal only)
  Vector dual; ///< multipliers of M y <= b (Optimal only)
};

/// max c^T y  s.t.  M y <= b, y >= 0, with b >= 0 so the slack basis is
/// feasible. Dense tableau simplex with Bland's rule.
LpResult solve_max(const Vector &c, const Matrix &M, const Vector &b);

/// Distribution-network LP: max y^T (D - s) s.t. (I - A) y <= 1, y >= 0.
LpResult network_lp(const Matrix &A, const Vector &D, const Vector &s);

/// Value of network_lp; +infinity when the LP is unbounded (excess demand
/// cannot be absorbed anywhere in the network).
double network_loss(const Matrix &A, const Vector &D, const Vector &s);

/// network_loss(A, D, s) > k, skipping the LP when max_i(D_i - s_i) already
/// decides the outcome (> k fails, <= 0 cannot fail).
bool network_failed(const Matrix &A, const Vector &D, const Vector &s, double k);

/// Row sums one, zero diagonal, nonnegative entries.
bool is_row_stochastic(const Matrix &A, double tol = 1e-12);
/// Strong connectivity of the directed graph with edges a_ij > 0.
bool is_irreducible(const Matrix &A);

Matrix complete_network(std::size_t d);
/// a_ij = 1 for j = i + 1 (mod d).
Matrix cyclic_network(std::size_t d);

} // namespace tailsampler
