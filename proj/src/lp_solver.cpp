#include "tailsampler/lp_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tailsampler {

std::string_view to_string(LpStatus status) {
  return status == LpStatus::Optimal ? "optimal" : "unbounded";
}

LpResult solve_max(const Vector &c, const Matrix &M, const Vector &b) {
  const Eigen::Index m = M.rows();
  const Eigen::Index n = M.cols();
  if (c.size() != n || b.size() != m)
    throw std::invalid_argument("solve_max: dimension mismatch");
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(b(i) >= 0.0))
      throw std::invalid_argument("solve_max: right-hand side must be nonnegative");

  constexpr double eps = 1e-11;
  const Eigen::Index cols = n + m;
  // rows 0..m-1 constraints, last column rhs; row m holds reduced costs
  Matrix T = Matrix::Zero(m + 1, cols + 1);
  T.topLeftCorner(m, n) = M;
  T.block(0, n, m, m).setIdentity();
  T.col(cols).head(m) = b;
  T.row(m).head(n) = c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    basis[i] = n + i;

  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (T(m, j) > eps * scale) {
        enter = j;
        break;
      }
    if (enter < 0)
      break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) <= eps)
        continue;
      const double ratio = T(i, cols) / T(i, enter);
      const bool tie = leave >= 0 && std::fabs(ratio - best) <= eps * std::max(1.0, best);
      if (leave < 0 || (!tie && ratio < best) || (tie && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) {
      LpResult r;
      r.status = LpStatus::Unbounded;
      r.value = std::numeric_limits<double>::infinity();
      return r;
    }

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != leave && T(i, enter) != 0.0)
        T.row(i) -= T(i, enter) * T.row(leave);
    basis[leave] = enter;
  }

  // Re-solve the final basis from the original data to shed pivot round-off.
  Matrix full(m, cols);
  full << M, Matrix::Identity(m, m);
  Matrix B(m, m);
  Vector cB(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    B.col(i) = full.col(basis[i]);
    cB(i) = basis[i] < n ? c(basis[i]) : 0.0;
  }
  const Eigen::PartialPivLU<Matrix> lu(B);
  const Vector xB = lu.solve(b);
  LpResult r;
  r.y = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] < n)
      r.y(basis[i]) = std::max(0.0, xB(i));
  r.dual = lu.transpose().solve(cB);
  r.value = c.dot(r.y);
  return r;
}

LpResult network_lp(const Matrix &A, const Vector &D, const Vector &s) {
  const Eigen::Index d = A.rows();
  if (A.cols() != d || D.size() != d || s.size() != d)
    throw std::invalid_argument("network_lp: dimension mismatch");
  const Matrix M = Matrix::Identity(d, d) - A;
  return solve_max(D - s, M, Vector::Ones(d));
}

double network_loss(const Matrix &A, const Vector &D, const Vector &s) {
  return network_lp(A, D, s).value;
}

bool network_failed(const Matrix &A, const Vector &D, const Vector &s, double k) {
  const double excess = (D - s).maxCoeff();
  if (excess > k)
    return true;
  if (excess <= 0.0 && k >= 0.0)
    return false;
  return network_loss(A, D, s) > k;
}

bool is_row_stochastic(const Matrix &A, double tol) {
  if (A.rows() != A.cols())
    return false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (std::fabs(A(i, i)) > tol)
      return false;
    double s = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) < -tol)
        return false;
      s += A(i, j);
    }
    if (std::fabs(s - 1.0) > 1e-9)
      return false;
  }
  return true;
}

bool is_irreducible(const Matrix &A) {
  const Eigen::Index d = A.rows();
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < d; ++j) {
        const double a = transpose ? A(j, i) : A(i, j);
        if (a > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    for (char c : seen)
      if (!c)
        return false;
    return true;
  };
  return d > 0 && reaches_all(false) && reaches_all(true);
}

Matrix complete_network(std::size_t d) {
  if (d < 2)
    throw std::invalid_argument("complete network needs at least two nodes");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix A = Matrix::Constant(n, n, 1.0 / static_cast<double>(d - 1));
  A.diagonal().setZero();
  return A;
}

Matrix cyclic_network(std::size_t d) {
  if (d < 2)
    throw std::invalid_argument("cyclic network needs at least two nodes");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    A(i, (i + 1) % n) = 1.0;
  return A;
}

} // namespace tailsampler
