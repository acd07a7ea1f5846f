#include "tailsampler/is_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace tailsampler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Welford accumulator with compensated updates of mean and M2.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double mean_c = 0.0;
  double m2 = 0.0;
  double m2_c = 0.0;
  std::size_t hits = 0;

  static void kahan_add(double &sum, double &comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  void push(double v) {
    n += 1.0;
    const double delta = v - mean;
    kahan_add(mean, mean_c, delta / n);
    kahan_add(m2, m2_c, delta * (v - mean));
  }

  void merge(const Moments &o) {
    if (o.n == 0.0)
      return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
    hits += o.hits;
  }
};

void set_relative_error(ISEstimate &e) {
  if (e.estimate > 0.0)
    e.relative_error = std::sqrt(e.sample_variance / static_cast<double>(e.n)) / e.estimate;
  else
    e.relative_error = kInf;
}

bool is_zero(const Vector &x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0)
      return false;
  return true;
}

} // namespace

void ISConfig::validate() const {
  if (!(l > 0.0) || !std::isfinite(l))
    throw std::invalid_argument("IS config: l must be positive");
  if (!(u >= l) || !std::isfinite(u))
    throw std::invalid_argument("IS config: u must be at least l");
  if (!(rho > 0.0))
    throw std::invalid_argument("IS config: rho must be positive");
  if (n_samples < 1)
    throw std::invalid_argument("IS config: n_samples must be at least 1");
  if (chunk_size < 1)
    throw std::invalid_argument("IS config: chunk_size must be at least 1");
}

double ISEstimate::standard_error() const {
  return n > 0 ? std::sqrt(sample_variance / static_cast<double>(n)) : kInf;
}

ISEstimate run_replications(std::size_t n, std::uint64_t seed, std::size_t chunk_size,
                            unsigned threads, const Replication &rep) {
  if (n == 0)
    throw std::invalid_argument("run_replications: n must be positive");
  chunk_size = std::max<std::size_t>(1, chunk_size);
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<Moments> partial(chunks);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks)
        return;
      Moments m;
      const std::size_t begin = c * chunk_size;
      const std::size_t end = std::min(n, begin + chunk_size);
      for (std::size_t k = begin; k < end; ++k) {
        RandomStream stream(seed, k);
        bool hit = false;
        const double v = rep(stream, hit);
        m.push(v);
        if (hit)
          ++m.hits;
      }
      partial[c] = m;
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), chunks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  Moments total;
  for (const Moments &m : partial)
    total.merge(m);

  ISEstimate e;
  e.n = n;
  e.seed = seed;
  e.hit_count = total.hits;
  e.estimate = std::max(0.0, total.mean);
  e.sample_variance = n > 1 ? std::max(0.0, total.m2) / static_cast<double>(n - 1) : 0.0;
  set_relative_error(e);
  return e;
}

Vector kappa(const Vector &x, double rho) {
  Vector g = x.cwiseAbs().array().log1p().matrix();
  const double s = g.size() ? g.maxCoeff() : 0.0;
  if (s == 0.0)
    return Vector::Zero(x.size());
  return g / (rho * s);
}

Vector transform(const Vector &x, double u, double l, double rho) {
  if (!(u >= l) || !(l > 0.0))
    throw std::invalid_argument("transform: requires u >= l > 0");
  const double log_r = std::log(u / l);
  const Vector k = kappa(x, rho);
  return (x.array() * (log_r * k.array()).exp()).matrix();
}

double log_jacobian(const Vector &x, double u, double l, double rho) {
  if (!(u >= l) || !(l > 0.0))
    throw std::invalid_argument("jacobian: requires u >= l > 0");
  const Vector g = x.cwiseAbs().array().log1p().matrix();
  const double s = g.size() ? g.maxCoeff() : 0.0;
  if (s == 0.0)
    throw std::domain_error("jacobian: undefined at x = 0");
  const double log_r = std::log(u / l);
  const double a = log_r / (rho * s);
  double sum_log = 0.0;
  double max_log = 0.0;
  double sum_kappa = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ax = std::fabs(x(i));
    const double lj = std::log1p(a * ax / (1.0 + ax));
    sum_log += lj;
    max_log = std::max(max_log, lj);
    sum_kappa += g(i) / (rho * s);
  }
  return sum_log - max_log + log_r * sum_kappa;
}

double jacobian(const Vector &x, double u, double l, double rho) {
  return std::exp(log_jacobian(x, u, l, rho));
}

Vector transform(const JointModel &jm, const Vector &x, double u, double l, double rho) {
  return jm.origin() + transform(x - jm.origin(), u, l, rho);
}

double log_likelihood_ratio(const JointModel &jm, const Vector &x, const Vector &z, double u,
                            double l, double rho) {
  if (!jm.in_support(z) || !jm.in_support(x))
    return -kInf;
  const Vector shifted = x - jm.origin();
  if (is_zero(shifted))
    return 0.0;
  const double lz = jm.log_density_joint(z);
  const double lx = jm.log_density_joint(x);
  const double v = lz - lx + log_jacobian(shifted, u, l, rho);
  return std::isnan(v) ? -kInf : v;
}

double likelihood_ratio(const JointModel &jm, const Vector &x, const Vector &z, double u, double l,
                        double rho) {
  return std::exp(log_likelihood_ratio(jm, x, z, u, l, rho));
}

ISEstimate estimate_is(const JointModel &jm, const EventFn &event, const ISConfig &cfg) {
  cfg.validate();
  const double u = cfg.u;
  const double l = cfg.l;
  const double rho = cfg.rho;
  Replication rep = [&](RandomStream &stream, bool &hit) -> double {
    const Vector x = jm.sample_joint(stream);
    if (is_zero(x - jm.origin())) {
      hit = event(x);
      return hit ? 1.0 : 0.0;
    }
    const Vector z = transform(jm, x, u, l, rho);
    if (!jm.in_support(z) || !event(z))
      return 0.0;
    hit = true;
    return std::exp(log_likelihood_ratio(jm, x, z, u, l, rho));
  };
  return run_replications(cfg.n_samples, cfg.seed, cfg.chunk_size, cfg.threads, rep);
}

ISEstimate estimate_is(const JointModel &jm, const LossModel &lm, const ISConfig &cfg) {
  if (std::fabs(lm.rho() - cfg.rho) > 1e-12)
    throw std::invalid_argument("estimate_is: loss homogeneity order differs from cfg.rho");
  const double u = cfg.u;
  return estimate_is(jm, EventFn([&lm, u](const Vector &z) { return lm.eval(z) > u; }), cfg);
}

ISEstimate estimate_naive(const JointModel &jm, const EventFn &event, std::size_t n,
                          std::uint64_t seed, unsigned threads, std::size_t chunk_size) {
  Replication rep = [&](RandomStream &stream, bool &hit) -> double {
    hit = event(jm.sample_joint(stream));
    return hit ? 1.0 : 0.0;
  };
  ISEstimate e = run_replications(n, seed, chunk_size, threads, rep);
  e.estimate = static_cast<double>(e.hit_count) / static_cast<double>(n);
  e.sample_variance = e.estimate * (1.0 - e.estimate);
  set_relative_error(e);
  return e;
}

ISEstimate estimate_naive(const JointModel &jm, const LossModel &lm, double u, std::size_t n,
                          std::uint64_t seed, unsigned threads, std::size_t chunk_size) {
  return estimate_naive(
      jm, EventFn([&lm, u](const Vector &x) { return lm.eval(x) > u; }), n, seed, threads,
      chunk_size);
}

Vector invert_transform(const Vector &z, double u, double l, double rho) {
  if (!(u >= l) || !(l > 0.0))
    throw std::invalid_argument("invert_transform: requires u >= l > 0");
  if (u == l || is_zero(z))
    return z;
  const double c = std::pow(u / l, 1.0 / rho);
  Eigen::Index top = 0;
  z.cwiseAbs().maxCoeff(&top);
  const double x_top = std::fabs(z(top)) / c;
  const double m = std::log1p(x_top);
  const double log_c = std::log(c);
  Vector x(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double target = std::fabs(z(i));
    double t;
    if (i == top || target == std::fabs(z(top))) {
      t = x_top;
    } else if (target == 0.0) {
      t = 0.0;
    } else {
      // t * c^{log1p(t)/m} is increasing in t; bisect on [0, x_top].
      auto f = [&](double s) { return std::log(s) + log_c * std::log1p(s) / m - std::log(target); };
      double lo = 0.0;
      double hi = x_top;
      bool converged = false;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0 || f(mid) < 0.0)
          lo = mid;
        else
          hi = mid;
        if (hi - lo <= 1e-15 * hi) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw std::runtime_error("invert_transform: coordinate " + std::to_string(i) +
                                 " did not converge in 200 iterations");
      t = 0.5 * (lo + hi);
    }
    x(i) = z(i) < 0.0 ? -t : t;
  }
  return x;
}

CrossvalResult crossvalidate_l(const JointModel &jm, const EventFn &event, const ISConfig &base,
                               const std::vector<double> &grid) {
  if (grid.empty())
    throw std::invalid_argument("crossvalidate_l: empty grid");
  for (double l : grid)
    if (!(l > 0.0) || !(l < base.u))
      throw std::invalid_argument("crossvalidate_l: every grid value must lie in (0, u)");
  CrossvalResult out;
  double best_var = kInf;
  bool found = false;
  for (double l : grid) {
    ISConfig cfg = base;
    cfg.l = l;
    ISEstimate e = estimate_is(jm, event, cfg);
    if (e.hit_count > 0 && e.sample_variance < best_var) {
      best_var = e.sample_variance;
      out.best_l = l;
      found = true;
    }
    out.table.push_back({l, e});
  }
  if (!found)
    out.best_l = grid.front();
  return out;
}

CrossvalResult crossvalidate_l(const JointModel &jm, const LossModel &lm, const ISConfig &base,
                               const std::vector<double> &grid) {
  const double u = base.u;
  return crossvalidate_l(jm, EventFn([&lm, u](const Vector &z) { return lm.eval(z) > u; }), base,
                         grid);
}

} // namespace tailsampler
