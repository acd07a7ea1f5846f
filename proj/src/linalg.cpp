#include "tailsampler/linalg.hpp"

#include <cmath>

namespace tailsampler {

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : std::domain_error("matrix is not positive definite: pivot " +
                        std::to_string(pivot) + " = " + std::to_string(value)),
      pivot_(pivot) {}

Matrix cholesky(const Matrix &R) {
  if (R.rows() != R.cols())
    throw std::invalid_argument("cholesky: matrix must be square");
  const Eigen::Index d = R.rows();
  Matrix L = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double diag = R(j, j);
    for (Eigen::Index k = 0; k < j; ++k)
      diag -= L(j, k) * L(j, k);
    if (!(diag > 0.0))
      throw NotPositiveDefinite(static_cast<std::size_t>(j), diag);
    L(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = R(i, j);
      for (Eigen::Index k = 0; k < j; ++k)
        s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

Matrix spd_inverse(const Matrix &lower) {
  const Eigen::Index d = lower.rows();
  const Matrix Linv = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  return Linv.transpose() * Linv;
}

double spd_log_det(const Matrix &lower) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i)
    s += std::log(lower(i, i));
  return 2.0 * s;
}

void validate_correlation(const Matrix &R) {
  if (R.rows() != R.cols() || R.rows() == 0)
    throw std::invalid_argument("correlation matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    if (std::fabs(R(i, i) - 1.0) > 1e-12)
      throw std::invalid_argument("correlation matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::fabs(R(i, j) - R(j, i)) > 1e-12)
        throw std::invalid_argument("correlation matrix must be symmetric");
  }
}

Matrix equicorrelation(std::size_t d, double rho) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix R = Matrix::Constant(n, n, rho);
  R.diagonal().setOnes();
  return R;
}

Matrix band_correlation(std::size_t d, double rho) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix R = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    R(i, i + 1) = rho;
    R(i + 1, i) = rho;
  }
  return R;
}

} // namespace tailsampler
