#include "tailsampler/pcr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "tailsampler/special.hpp"

namespace tailsampler {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Draws the defaults of every cell at the given logits; returns sum e_i Y_i.
double sample_loss(const Portfolio &p, const Vector &logits, RandomStream &stream) {
  double total = 0.0;
  for (std::size_t c = 0; c < p.cell_count(); ++c) {
    const double prob = logistic(logits(static_cast<Eigen::Index>(c)));
    std::size_t defaults = 0;
    for (std::size_t k = 0; k < p.cell_size(c); ++k)
      if (stream.uniform01() < prob)
        ++defaults;
    total += p.cell_exposure(c) * static_cast<double>(defaults);
  }
  return total;
}

Vector shift_logits(const Portfolio &p, const Vector &logits, double lambda) {
  Vector out = logits;
  for (std::size_t c = 0; c < p.cell_count(); ++c)
    out(static_cast<Eigen::Index>(c)) += lambda * p.cell_exposure(c);
  return out;
}

} // namespace

std::string_view to_string(DefaultModel model) {
  return model == DefaultModel::Logit ? "logit" : "intensity";
}

Portfolio::Portfolio(LoanBook book, DefaultModel model, double gamma)
    : book_(std::move(book)), model_(model), gamma_(gamma) {
  book_.validate();
  if (!std::isfinite(gamma_))
    throw std::invalid_argument("portfolio: gamma must be finite");
  const std::size_t m = book_.loans();
  double total = 0.0;
  loan_cell_.resize(m);
  std::vector<std::pair<std::size_t, double>> cell_keys;
  for (std::size_t i = 0; i < m; ++i) {
    total += book_.exposures[i];
    max_exposure_ = std::max(max_exposure_, book_.exposures[i]);
    std::size_t g = 0;
    for (; g < groups_.size(); ++g)
      if (groups_[g].type == book_.types[i] && groups_[g].covariates == book_.covariates[i])
        break;
    if (g == groups_.size())
      groups_.push_back({book_.types[i], book_.covariates[i]});
    std::size_t c = 0;
    for (; c < cells_.size(); ++c)
      if (cells_[c].group == g && cells_[c].exposure == book_.exposures[i])
        break;
    if (c == cells_.size())
      cells_.push_back({g, book_.exposures[i], 0});
    ++cells_[c].count;
    loan_cell_[i] = c;
  }
  mean_exposure_ = total / static_cast<double>(m);

  // q ebar on the boundary of a type-subset exposure sum
  const std::size_t J = book_.type_count();
  if (J <= CreditStructure::kMaxTypes) {
    std::vector<double> type_exposure(J, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      type_exposure[book_.types[i]] += book_.exposures[i];
    for (std::uint32_t mask = 1; mask < (1u << J); ++mask) {
      double s = 0.0;
      for (std::size_t j = 0; j < J; ++j)
        if (mask & (1u << j))
          s += type_exposure[j];
      if (std::fabs(s - book_.q * total) <= 1e-12 * total)
        warnings_.push_back("q * ebar coincides with the exposure share of a type subset");
    }
  }
}

double Portfolio::logit_from_score(double w) const {
  const double a = w - gamma_;
  if (model_ == DefaultModel::Logit)
    return a;
  // p = 1 - exp(-h), h = e^a;  logit = log(p) - log(1-p) = log(-expm1(-h)) + h
  if (a > 700.0)
    return kInf;
  const double h = std::exp(a);
  if (h < 1e-300)
    return a;
  return std::log(-std::expm1(-h)) + h;
}

Vector Portfolio::cell_logits(const Vector &z) const {
  std::vector<double> scores(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g)
    scores[g] = book_.W[groups_[g].type].eval(z, groups_[g].covariates);
  Vector out(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t c = 0; c < cells_.size(); ++c)
    out(static_cast<Eigen::Index>(c)) = logit_from_score(scores[cells_[c].group]);
  return out;
}

double Portfolio::default_logit(std::size_t i, const Vector &z) const {
  if (i >= m())
    throw std::out_of_range("default_logit: loan index out of range");
  const ReluNetwork &w = book_.W[book_.types[i]];
  return logit_from_score(w.eval(z, book_.covariates[i]));
}

double Portfolio::default_prob(std::size_t i, const Vector &z) const {
  return logistic(default_logit(i, z));
}

double Portfolio::psi(double theta, const Vector &logits) const {
  if (!(theta >= 0.0))
    throw std::domain_error("psi: theta must be nonnegative");
  if (theta * max_exposure_ > 700.0)
    return kInf;
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const double l = logits(static_cast<Eigen::Index>(c));
    const double t = theta * cells_[c].exposure;
    // for positive logits use t + sp(-l-t) - sp(-l), finite even when l = +inf
    const double term = l > 0.0 ? t + softplus(-l - t) - softplus(-l) : softplus(l + t) - softplus(l);
    s += static_cast<double>(cells_[c].count) * term;
  }
  return s / static_cast<double>(m());
}

double Portfolio::psi_prime(double theta, const Vector &logits) const {
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const double e = cells_[c].exposure;
    s += static_cast<double>(cells_[c].count) * e * logistic(logits(static_cast<Eigen::Index>(c)) + theta * e);
  }
  return s / static_cast<double>(m());
}

double Portfolio::solve_twist(const Vector &logits) const {
  const double target = threshold();
  if (psi_prime(0.0, logits) >= target)
    return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (psi_prime(hi, logits) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi * max_exposure_ > 1e4)
      throw TwistFailure("solve_twist: threshold unattainable within the bracket");
  }
  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = psi_prime(lambda, logits) - target;
    if (std::fabs(f) <= 1e-14 * target)
      break;
    if (f < 0.0)
      lo = lambda;
    else
      hi = lambda;
    if (hi - lo <= 1e-15 * hi)
      break;
    double d2 = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const double e = cells_[c].exposure;
      const double pt = logistic(logits(static_cast<Eigen::Index>(c)) + lambda * e);
      d2 += static_cast<double>(cells_[c].count) * e * e * pt * (1.0 - pt);
    }
    d2 /= static_cast<double>(m());
    double next = d2 > 0.0 ? lambda - f / d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    lambda = next;
  }
  return lambda;
}

double psi_m(const Portfolio &p, double theta, const Vector &z) {
  return p.psi(theta, p.cell_logits(z));
}

double solve_twist(const Portfolio &p, const Vector &z) {
  return p.solve_twist(p.cell_logits(z));
}

double twisted_prob(const Portfolio &p, std::size_t i, const Vector &z, double lambda) {
  if (!(lambda >= 0.0))
    throw std::domain_error("twisted_prob: lambda must be nonnegative");
  return logistic(p.default_logit(i, z) + lambda * p.book().exposures[i]);
}

PcrEstimate estimate_pcr(const Portfolio &p, const JointModel &jm, const ISConfig &cfg) {
  cfg.validate();
  if (jm.dimension() != p.book().W.front().factor_dim())
    throw std::invalid_argument("estimate_pcr: factor model and score networks differ in dimension");
  const double level = p.threshold() * static_cast<double>(p.m()) * (1.0 - 1e-12);
  std::atomic<std::size_t> failures{0};
  Replication rep = [&](RandomStream &stream, bool &hit) -> double {
    const Vector x = jm.sample_joint(stream);
    const Vector z = transform(jm, x, cfg.u, cfg.l, cfg.rho);
    const double log_lx = log_likelihood_ratio(jm, x, z, cfg.u, cfg.l, cfg.rho);
    if (!std::isfinite(log_lx))
      return 0.0;
    const Vector logits = p.cell_logits(z);
    double lambda;
    try {
      lambda = p.solve_twist(logits);
    } catch (const TwistFailure &) {
      failures.fetch_add(1);
      return 0.0;
    }
    const double loss = sample_loss(p, shift_logits(p, logits, lambda), stream);
    if (loss < level)
      return 0.0;
    hit = true;
    const double log_ly =
        -lambda * loss + static_cast<double>(p.m()) * p.psi(lambda, logits);
    return std::exp(log_lx + log_ly);
  };
  PcrEstimate out;
  out.estimate = run_replications(cfg.n_samples, cfg.seed, cfg.chunk_size, cfg.threads, rep);
  out.twist_failures = failures.load();
  return out;
}

ISEstimate estimate_pcr_conditional(const Portfolio &p, const Vector &z, std::size_t n,
                                    std::uint64_t seed, unsigned threads) {
  const double level = p.threshold() * static_cast<double>(p.m()) * (1.0 - 1e-12);
  const Vector logits = p.cell_logits(z);
  const double lambda = p.solve_twist(logits);
  const double mpsi = static_cast<double>(p.m()) * p.psi(lambda, logits);
  const Vector twisted = shift_logits(p, logits, lambda);
  Replication rep = [&](RandomStream &stream, bool &hit) -> double {
    const double loss = sample_loss(p, twisted, stream);
    if (loss < level)
      return 0.0;
    hit = true;
    return std::exp(-lambda * loss + mpsi);
  };
  return run_replications(n, seed, 1024, threads, rep);
}

ISEstimate estimate_pcr_naive(const Portfolio &p, const JointModel &jm, std::size_t n,
                              std::uint64_t seed, unsigned threads) {
  const double level = p.threshold() * static_cast<double>(p.m()) * (1.0 - 1e-12);
  Replication rep = [&](RandomStream &stream, bool &hit) -> double {
    const Vector x = jm.sample_joint(stream);
    hit = sample_loss(p, p.cell_logits(x), stream) >= level;
    return hit ? 1.0 : 0.0;
  };
  ISEstimate e = run_replications(n, seed, 1024, threads, rep);
  e.sample_variance = e.estimate * (1.0 - e.estimate);
  e.relative_error = e.estimate > 0.0
                         ? std::sqrt(e.sample_variance / static_cast<double>(n)) / e.estimate
                         : kInf;
  return e;
}

IStar credit_exponent(const Portfolio &p, const RateSpec &rs) {
  const LossModel lm = LossModel::credit_structural(p.book());
  return exponent_Istar(rs, lm);
}

} // namespace tailsampler
