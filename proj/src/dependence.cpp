#include "tailsampler/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tailsampler/special.hpp"

namespace tailsampler {

std::string_view to_string(CopulaKind kind) {
  switch (kind) {
  case CopulaKind::Independence: return "independence";
  case CopulaKind::Gaussian: return "gaussian";
  case CopulaKind::Clayton: return "clayton";
  }
  return "unknown";
}

Copula::Copula(CopulaKind kind, std::size_t d) : kind_(kind), d_(d) {
  if (d == 0)
    throw std::invalid_argument("copula dimension must be positive");
}

Copula Copula::independence(std::size_t d) { return Copula(CopulaKind::Independence, d); }

Copula Copula::gaussian(const Matrix &R) {
  validate_correlation(R);
  Copula c(CopulaKind::Gaussian, static_cast<std::size_t>(R.rows()));
  c.R_ = R;
  c.L_ = cholesky(R);
  c.precision_minus_identity_ = spd_inverse(c.L_);
  c.precision_minus_identity_.diagonal().array() -= 1.0;
  c.log_det_ = spd_log_det(c.L_);
  return c;
}

Copula Copula::clayton(std::size_t d, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("clayton theta must be positive");
  Copula c(CopulaKind::Clayton, d);
  c.theta_ = theta;
  return c;
}

double Copula::log_density_scores(const Vector &g) const {
  return -0.5 * log_det_ - 0.5 * g.dot(precision_minus_identity_ * g);
}

double Copula::log_density_standard(const Vector &y) const {
  const double th = theta_;
  const auto d = static_cast<double>(d_);
  double s = 0.0;
  for (std::size_t k = 1; k < d_; ++k)
    s += std::log1p(static_cast<double>(k) * th);
  double sum_y = 0.0;
  double max_ty = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    sum_y += y(i);
    max_ty = std::max(max_ty, th * y(i));
  }
  // log(sum_i e^{theta y_i} - d + 1)
  double log_inner;
  if (max_ty < 30.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      acc += std::expm1(th * y(i));
    log_inner = std::log1p(acc);
  } else {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      acc += std::exp(th * y(i) - max_ty);
    log_inner = max_ty + std::log(acc - (d - 1.0) * std::exp(-max_ty));
  }
  return s + (th + 1.0) * sum_y - (1.0 / th + d) * log_inner;
}

JointModel::JointModel(std::vector<Marginal> marginals, Copula copula)
    : marginals_(std::move(marginals)), copula_(std::move(copula)) {
  if (marginals_.size() != copula_.dimension())
    throw std::invalid_argument("joint model: copula dimension " +
                                std::to_string(copula_.dimension()) + " does not match " +
                                std::to_string(marginals_.size()) + " marginals");
  origin_ = Vector::Zero(static_cast<Eigen::Index>(marginals_.size()));
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    const double lo = marginals_[i].support_lower();
    origin_(static_cast<Eigen::Index>(i)) = std::isfinite(lo) ? lo : 0.0;
  }
}

Vector JointModel::sample_joint(RandomStream &stream) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Vector x(d);
  switch (copula_.kind()) {
  case CopulaKind::Independence:
    for (Eigen::Index i = 0; i < d; ++i)
      x(i) = marginals_[i].sample(stream);
    break;
  case CopulaKind::Gaussian: {
    Vector n(d);
    for (Eigen::Index i = 0; i < d; ++i)
      n(i) = stream.std_normal();
    const Vector z = copula_.cholesky_factor().triangularView<Eigen::Lower>() * n;
    for (Eigen::Index i = 0; i < d; ++i)
      x(i) = marginals_[i].from_normal_score(z(i));
    break;
  }
  case CopulaKind::Clayton: {
    const double th = copula_.theta();
    const double v = stream.gamma(1.0 / th);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double y = std::log1p(stream.exponential() / v) / th;
      x(i) = marginals_[i].hazard_inverse(y);
    }
    break;
  }
  }
  return x;
}

bool JointModel::in_support(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != dimension())
    return false;
  for (std::size_t i = 0; i < dimension(); ++i)
    if (!marginals_[i].in_support(x(static_cast<Eigen::Index>(i))))
      return false;
  return true;
}

double JointModel::log_density_joint(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != dimension())
    throw std::invalid_argument("log_density_joint: dimension mismatch");
  if (!in_support(x))
    throw std::domain_error("log_density_joint: point outside the support");
  const auto d = x.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    s += marginals_[i].log_density(x(i));
  switch (copula_.kind()) {
  case CopulaKind::Independence: break;
  case CopulaKind::Gaussian: {
    Vector g(d);
    for (Eigen::Index i = 0; i < d; ++i)
      g(i) = marginals_[i].normal_score(x(i));
    s += copula_.log_density_scores(g);
    break;
  }
  case CopulaKind::Clayton: {
    Vector y(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Marginal &m = marginals_[i];
      if (m.kind() == MarginalKind::Normal) {
        // avoid the hazard clamp far in the lower tail
        const double z = (x(i) - m.param1()) / m.param2();
        y(i) = z < 0.0 ? -std::log1p(-normal_cdf(z)) : -log_normal_sf(z);
      } else {
        y(i) = m.hazard(x(i));
      }
    }
    s += copula_.log_density_standard(y);
    break;
  }
  }
  return s;
}

Vector JointModel::to_standard(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != dimension())
    throw std::invalid_argument("to_standard: dimension mismatch");
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y(i) = marginals_[i].hazard(x(i));
  return y;
}

Vector JointModel::from_standard(const Vector &y) const {
  if (static_cast<std::size_t>(y.size()) != dimension())
    throw std::invalid_argument("from_standard: dimension mismatch");
  Vector x(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    x(i) = marginals_[i].hazard_inverse(y(i));
  return x;
}

} // namespace tailsampler
