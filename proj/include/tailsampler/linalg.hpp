#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tailsampler {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NotPositiveDefinite : public std::domain_error {
public:
  NotPositiveDefinite(std::size_t pivot, double value);
  std::size_t pivot() const { return pivot_; }

private:
  std::size_t pivot_;
};

/// Lower-triangular L with L L^T = R. Throws NotPositiveDefinite with the index
/// of the first non-positive pivot.
Matrix cholesky(const Matrix &R);

/// Inverse and log-determinant of an SPD matrix from its Cholesky factor.
Matrix spd_inverse(const Matrix &lower);
double spd_log_det(const Matrix &lower);

/// Checks a correlation matrix: square, symmetric, unit diagonal.
void validate_correlation(const Matrix &R);

Matrix equicorrelation(std::size_t d, double rho);
/// Unit diagonal, `rho` on the first off-diagonals, zero elsewhere.
Matrix band_correlation(std::size_t d, double rho);

} // namespace tailsampler
