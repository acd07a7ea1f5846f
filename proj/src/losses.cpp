#include "tailsampler/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tailsampler/lp_solver.hpp"

namespace tailsampler {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
  case LossKind::LinearPortfolio: return "linear";
  case LossKind::PiecewiseAffine: return "piecewise_affine";
  case LossKind::PiecewiseQuadratic: return "piecewise_quadratic";
  case LossKind::ReluNetwork: return "relu";
  case LossKind::DistributionNetwork: return "distribution_network";
  case LossKind::CreditRiskStructural: return "credit_structural";
  }
  return "unknown";
}

void LoanBook::validate() const {
  const std::size_t m = types.size();
  if (m == 0)
    throw std::invalid_argument("portfolio has no loans");
  if (W.empty())
    throw std::invalid_argument("portfolio has no score networks");
  if (exposures.size() != m || covariates.size() != m)
    throw std::invalid_argument("portfolio: types, exposures and covariates differ in length");
  const std::size_t d = W.front().factor_dim();
  for (const ReluNetwork &w : W)
    if (w.factor_dim() != d)
      throw std::invalid_argument("portfolio: score networks disagree on the factor dimension");
  for (std::size_t i = 0; i < m; ++i) {
    if (types[i] >= W.size())
      throw std::invalid_argument("portfolio: loan " + std::to_string(i) + " has unknown type");
    if (!(exposures[i] > 0.0) || !std::isfinite(exposures[i]))
      throw std::invalid_argument("portfolio: exposures must be positive");
    if (static_cast<std::size_t>(covariates[i].size()) != W[types[i]].covariate_dim())
      throw std::invalid_argument("portfolio: loan " + std::to_string(i) +
                                  " covariate length does not match its network");
  }
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("portfolio: q must lie in (0,1)");
}

CreditStructure::CreditStructure(LoanBook book) : book_(std::move(book)) {
  book_.validate();
  const std::size_t J = book_.type_count();
  if (J > kMaxTypes)
    throw std::invalid_argument("credit structure: at most " + std::to_string(kMaxTypes) +
                                " loan types are supported, got " + std::to_string(J));
  std::vector<double> type_exposure(J, 0.0);
  double total = 0.0;
  groups_.assign(J, {});
  for (std::size_t i = 0; i < book_.loans(); ++i) {
    const std::size_t t = book_.types[i];
    type_exposure[t] += book_.exposures[i];
    total += book_.exposures[i];
    auto &g = groups_[t];
    const Vector &v = book_.covariates[i];
    if (std::none_of(g.begin(), g.end(), [&](const Vector &u) { return u == v; }))
      g.push_back(v);
  }
  const double threshold = book_.q * total;
  for (std::uint32_t mask = 1; mask < (1u << J); ++mask) {
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      if (mask & (1u << j))
        s += type_exposure[j];
    if (s >= threshold)
      subsets_.push_back(mask);
  }
}

Vector CreditStructure::type_minima(const Vector &x) const {
  const std::size_t J = book_.type_count();
  Vector w = Vector::Constant(static_cast<Eigen::Index>(J), kInf);
  for (std::size_t j = 0; j < J; ++j)
    for (const Vector &v : groups_[j])
      w(j) = std::min(w(j), book_.W[j].eval(x, v));
  return w;
}

double CreditStructure::max_min(const Vector &per_type) const {
  double best = -kInf;
  for (std::uint32_t mask : subsets_) {
    double lo = kInf;
    for (Eigen::Index j = 0; j < per_type.size(); ++j)
      if (mask & (1u << j))
        lo = std::min(lo, per_type(j));
    best = std::max(best, lo);
  }
  return best;
}

double CreditStructure::eval(const Vector &x) const { return max_min(type_minima(x)); }

double CreditStructure::limit_eval(const Vector &x) const {
  const std::size_t J = book_.type_count();
  Vector w(static_cast<Eigen::Index>(J));
  for (std::size_t j = 0; j < J; ++j)
    w(j) = groups_[j].empty() ? kInf : book_.W[j].limit_eval(x);
  return max_min(w);
}

LossModel::LossModel(LossKind kind, std::size_t dim, double rho, Impl impl)
    : kind_(kind), dim_(dim), rho_(rho), impl_(std::move(impl)) {}

LossModel LossModel::linear(Vector w) {
  if (w.size() == 0)
    throw std::invalid_argument("linear loss needs weights");
  const auto d = static_cast<std::size_t>(w.size());
  return LossModel(LossKind::LinearPortfolio, d, 1.0, Linear{std::move(w)});
}

LossModel LossModel::piecewise_affine(std::vector<Vector> theta, std::vector<double> r) {
  if (theta.empty() || theta.size() != r.size())
    throw std::invalid_argument("piecewise affine loss needs matching theta and r lists");
  const auto d = static_cast<std::size_t>(theta.front().size());
  for (const Vector &t : theta)
    if (static_cast<std::size_t>(t.size()) != d)
      throw std::invalid_argument("piecewise affine loss: theta vectors differ in length");
  return LossModel(LossKind::PiecewiseAffine, d, 1.0, Affine{std::move(theta), std::move(r)});
}

LossModel LossModel::piecewise_quadratic(std::vector<Matrix> Q, std::vector<Vector> c) {
  if (Q.empty() || Q.size() != c.size())
    throw std::invalid_argument("piecewise quadratic loss needs matching Q and c lists");
  const auto d = static_cast<std::size_t>(Q.front().rows());
  for (std::size_t k = 0; k < Q.size(); ++k)
    if (static_cast<std::size_t>(Q[k].rows()) != d || static_cast<std::size_t>(Q[k].cols()) != d ||
        static_cast<std::size_t>(c[k].size()) != d)
      throw std::invalid_argument("piecewise quadratic loss: inconsistent shapes");
  return LossModel(LossKind::PiecewiseQuadratic, d, 2.0, Quadratic{std::move(Q), std::move(c)});
}

LossModel LossModel::relu(ReluNetwork net) {
  if (net.covariate_dim() != 0)
    throw std::invalid_argument("relu loss cannot take covariates");
  const std::size_t d = net.factor_dim();
  const double rho = net.rho();
  return LossModel(LossKind::ReluNetwork, d, rho, std::move(net));
}

LossModel LossModel::distribution_network(Matrix A, Vector supply) {
  const auto d = static_cast<std::size_t>(A.rows());
  if (static_cast<std::size_t>(A.cols()) != d || static_cast<std::size_t>(supply.size()) != d)
    throw std::invalid_argument("distribution network: inconsistent shapes");
  const double total = supply.sum();
  if (!(total > 0.0) || (supply.array() < 0.0).any())
    throw std::invalid_argument("distribution network: supplies must be nonnegative with positive total");
  Vector theta = supply / total;
  return LossModel(LossKind::DistributionNetwork, d, 1.0,
                   Network{std::move(A), std::move(supply), std::move(theta)});
}

LossModel LossModel::credit_structural(LoanBook book) {
  CreditStructure cs(std::move(book));
  const std::size_t d = cs.book().W.front().factor_dim();
  double rho = cs.book().W.front().rho();
  return LossModel(LossKind::CreditRiskStructural, d, rho, std::move(cs));
}

void LossModel::check_dim(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw std::invalid_argument("loss " + std::string(to_string(kind_)) + ": expected dimension " +
                                std::to_string(dim_) + ", got " + std::to_string(x.size()));
}

double LossModel::eval(const Vector &x) const {
  check_dim(x);
  switch (kind_) {
  case LossKind::LinearPortfolio: return std::get<Linear>(impl_).w.dot(x);
  case LossKind::PiecewiseAffine: {
    const auto &a = std::get<Affine>(impl_);
    double best = -kInf;
    for (std::size_t k = 0; k < a.theta.size(); ++k)
      best = std::max(best, a.theta[k].dot(x) + a.r[k]);
    return best;
  }
  case LossKind::PiecewiseQuadratic: {
    const auto &q = std::get<Quadratic>(impl_);
    double best = -kInf;
    for (std::size_t k = 0; k < q.Q.size(); ++k)
      best = std::max(best, x.dot(q.Q[k] * x) + q.c[k].dot(x));
    return best;
  }
  case LossKind::ReluNetwork: return std::get<ReluNetwork>(impl_).eval(x);
  case LossKind::DistributionNetwork: {
    const auto &n = std::get<Network>(impl_);
    return network_loss(n.A, x, n.supply);
  }
  case LossKind::CreditRiskStructural: return std::get<CreditStructure>(impl_).eval(x);
  }
  return 0.0;
}

double LossModel::limit_eval(const Vector &x) const {
  check_dim(x);
  switch (kind_) {
  case LossKind::LinearPortfolio: return std::get<Linear>(impl_).w.dot(x);
  case LossKind::PiecewiseAffine: {
    const auto &a = std::get<Affine>(impl_);
    double best = -kInf;
    for (const Vector &t : a.theta)
      best = std::max(best, t.dot(x));
    return best;
  }
  case LossKind::PiecewiseQuadratic: {
    const auto &q = std::get<Quadratic>(impl_);
    double best = -kInf;
    for (const Matrix &Q : q.Q)
      best = std::max(best, x.dot(Q * x));
    return best;
  }
  case LossKind::ReluNetwork: return std::get<ReluNetwork>(impl_).limit_eval(x);
  case LossKind::DistributionNetwork: {
    const auto &n = std::get<Network>(impl_);
    double best = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (n.theta(i) > 0.0)
        best = std::max(best, x(i) / n.theta(i));
      else if (x(i) > 0.0)
        return kInf;
    }
    return best;
  }
  case LossKind::CreditRiskStructural: return std::get<CreditStructure>(impl_).limit_eval(x);
  }
  return 0.0;
}

double LossModel::numeric_limit(const Vector &x, double n) const {
  return eval(n * x) / std::pow(n, rho_);
}

const CreditStructure *LossModel::credit() const {
  return std::get_if<CreditStructure>(&impl_);
}

} // namespace tailsampler
