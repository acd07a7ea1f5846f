#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tailsampler/dependence.hpp"
#include "tailsampler/is_core.hpp"
#include "tailsampler/losses.hpp"
#include "tailsampler/rate_analysis.hpp"

namespace tailsampler {

enum class DefaultModel { Logit, Intensity };

std::string_view to_string(DefaultModel model);

class TwistFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Credit portfolio: loans with conditionally independent defaults given the
/// common factors z. Logit model: P(default) = logistic(W - gamma); intensity
/// model: 1 - exp(-e^{W - gamma}).
///
/// Everything is computed from per-loan default logits, so tiny default
/// probabilities never underflow.
class Portfolio {
public:
  Portfolio(LoanBook book, DefaultModel model, double gamma);

  const LoanBook &book() const { return book_; }
  DefaultModel model() const { return model_; }
  double gamma() const { return gamma_; }
  std::size_t m() const { return book_.loans(); }
  double mean_exposure() const { return mean_exposure_; }
  double max_exposure() const { return max_exposure_; }
  /// q * mean exposure.
  double threshold() const { return book_.q * mean_exposure_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

  /// Default logits of each loan cell (loans sharing type, covariates and
  /// exposure) at factor value z.
  Vector cell_logits(const Vector &z) const;
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t cell_size(std::size_t c) const { return cells_[c].count; }
  double cell_exposure(std::size_t c) const { return cells_[c].exposure; }
  std::size_t cell_of(std::size_t loan) const { return loan_cell_[loan]; }

  double default_logit(std::size_t i, const Vector &z) const;
  double default_prob(std::size_t i, const Vector &z) const;

  /// psi_m(theta) = m^{-1} sum log(1 + p_i (e^{theta e_i} - 1)); +inf when
  /// theta * e_max > 700.
  double psi(double theta, const Vector &logits) const;
  /// d psi / d theta = m^{-1} sum e_i ptilde_i(theta).
  double psi_prime(double theta, const Vector &logits) const;
  /// lambda >= 0 minimizing -theta q ebar + psi(theta). Throws TwistFailure.
  double solve_twist(const Vector &logits) const;

private:
  struct Cell {
    std::size_t group; // index into groups_
    double exposure;
    std::size_t count;
  };
  struct Group {
    std::size_t type;
    Vector covariates;
  };
  double logit_from_score(double w) const;

  LoanBook book_;
  DefaultModel model_;
  double gamma_;
  double mean_exposure_ = 0.0;
  double max_exposure_ = 0.0;
  std::vector<Group> groups_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> loan_cell_;
  std::vector<std::string> warnings_;
};

double psi_m(const Portfolio &p, double theta, const Vector &z);
double solve_twist(const Portfolio &p, const Vector &z);
/// p_i e^{lambda e_i} / (1 + p_i (e^{lambda e_i} - 1)).
double twisted_prob(const Portfolio &p, std::size_t i, const Vector &z, double lambda);

struct PcrEstimate {
  ISEstimate estimate;
  std::size_t twist_failures = 0;
};

/// Factor transform plus conditional exponential twisting of the defaults.
/// cfg.u, cfg.l and cfg.rho drive the factor transform.
PcrEstimate estimate_pcr(const Portfolio &p, const JointModel &jm, const ISConfig &cfg);

/// Twisted estimator of P(L_m >= q ebar | X = z) at a fixed factor value.
ISEstimate estimate_pcr_conditional(const Portfolio &p, const Vector &z, std::size_t n,
                                    std::uint64_t seed, unsigned threads = 1);

/// Plain simulation of factors and defaults.
ISEstimate estimate_pcr_naive(const Portfolio &p, const JointModel &jm, std::size_t n,
                              std::uint64_t seed, unsigned threads = 1);

/// inf { I(y) : max_{I in J} min_{k in I} W*_k(q* y^{1/alpha}) >= 1 }.
IStar credit_exponent(const Portfolio &p, const RateSpec &rs);

} // namespace tailsampler
