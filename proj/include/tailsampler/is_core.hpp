#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tailsampler/dependence.hpp"
#include "tailsampler/linalg.hpp"
#include "tailsampler/losses.hpp"
#include "tailsampler/rng.hpp"

namespace tailsampler {

struct ISConfig {
  double u = 1.0;
  double l = 1.0;
  double rho = 1.0;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 1;
  std::size_t chunk_size = 1024;
  unsigned threads = 1;

  void validate() const;
};

struct ISEstimate {
  double estimate = 0.0;
  double sample_variance = 0.0; ///< per-replication variance
  double relative_error = 0.0;  ///< +inf when estimate == 0
  std::size_t n = 0;
  std::size_t hit_count = 0;
  std::uint64_t seed = 0;

  double standard_error() const;
};

/// One replication: returns its contribution and sets `hit` when the target
/// event occurred. Replication k always receives RandomStream(seed, k).
using Replication = std::function<double(RandomStream &stream, bool &hit)>;

/// Runs n replications in chunks on `threads` workers. Chunk statistics are
/// merged in chunk order, so the result does not depend on the worker count.
ISEstimate run_replications(std::size_t n, std::uint64_t seed, std::size_t chunk_size,
                            unsigned threads, const Replication &rep);

/// kappa_i = log(1+|x_i|) / (rho * max_j log(1+|x_j|)); zero at x = 0.
Vector kappa(const Vector &x, double rho);
/// T(x) = x * (u/l)^kappa(x).
Vector transform(const Vector &x, double u, double l, double rho);
double log_jacobian(const Vector &x, double u, double l, double rho);
double jacobian(const Vector &x, double u, double l, double rho);

/// T applied around the support origin of the model: o + T(x - o).
Vector transform(const JointModel &jm, const Vector &x, double u, double l, double rho);

/// log of f_X(z)/f_X(x) * J(x - o); -inf when z leaves the support.
double log_likelihood_ratio(const JointModel &jm, const Vector &x, const Vector &z, double u,
                            double l, double rho);
double likelihood_ratio(const JointModel &jm, const Vector &x, const Vector &z, double u,
                        double l, double rho);

/// Target event evaluated at the transformed point.
using EventFn = std::function<bool(const Vector &z)>;

ISEstimate estimate_is(const JointModel &jm, const LossModel &lm, const ISConfig &cfg);
ISEstimate estimate_is(const JointModel &jm, const EventFn &event, const ISConfig &cfg);

ISEstimate estimate_naive(const JointModel &jm, const LossModel &lm, double u, std::size_t n,
                          std::uint64_t seed, unsigned threads = 1, std::size_t chunk_size = 1024);
ISEstimate estimate_naive(const JointModel &jm, const EventFn &event, std::size_t n,
                          std::uint64_t seed, unsigned threads = 1, std::size_t chunk_size = 1024);

/// T^{-1}(z). Throws std::runtime_error if a coordinate fails to converge
/// within 200 bisection steps.
Vector invert_transform(const Vector &z, double u, double l, double rho);

struct CrossvalPoint {
  double l;
  ISEstimate estimate;
};

struct CrossvalResult {
  double best_l = 0.0;
  std::vector<CrossvalPoint> table;
};

/// Runs estimate_is for every l in the grid with the same seed (common random
/// numbers) and returns the l of smallest sample variance among points with
/// at least one hit.
CrossvalResult crossvalidate_l(const JointModel &jm, const EventFn &event, const ISConfig &base,
                               const std::vector<double> &grid);
CrossvalResult crossvalidate_l(const JointModel &jm, const LossModel &lm, const ISConfig &base,
                               const std::vector<double> &grid);

} // namespace tailsampler
