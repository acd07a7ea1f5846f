#include "tailsampler/rate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tailsampler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void simplex_points(std::size_t d, std::size_t steps, std::vector<std::size_t> &cur,
                    std::size_t left, std::vector<Vector> &out) {
  if (cur.size() + 1 == d) {
    Vector y(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < cur.size(); ++i)
      y(static_cast<Eigen::Index>(i)) = static_cast<double>(cur[i]) / static_cast<double>(steps);
    y(static_cast<Eigen::Index>(d - 1)) = static_cast<double>(left) / static_cast<double>(steps);
    out.push_back(std::move(y));
    return;
  }
  for (std::size_t k = 0; k <= left; ++k) {
    cur.push_back(k);
    simplex_points(d, steps, cur, left - k, out);
    cur.pop_back();
  }
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

double direction_objective(const RateSpec &rs, const LevelFn &G, const Vector &w) {
  const double s = w.cwiseAbs().sum();
  if (!(s > 0.0) || !std::isfinite(s))
    return kInf;
  const Vector y = w.cwiseAbs() / s;
  const double c = ray_scale(rs, G, y);
  if (!std::isfinite(c))
    return kInf;
  return c * rate_eval(rs, y);
}

// Plain Nelder-Mead on R^d; returns the best vertex.
Vector nelder_mead(const std::function<double(const Vector &)> &f, const Vector &start,
                   double step, int max_evals) {
  const Eigen::Index n = start.size();
  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(start);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector p = start;
    p(i) += step;
    pts.push_back(p);
  }
  for (const Vector &p : pts)
    vals.push_back(f(p));
  int evals = static_cast<int>(pts.size());
  std::vector<std::size_t> order(pts.size());
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= 1e-12 * std::max(1.0, std::fabs(vals[best])))
      break;
    Vector centroid = Vector::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      centroid += pts[order[k]];
    centroid /= static_cast<double>(n);
    const Vector refl = centroid + (centroid - pts[worst]);
    const double fr = f(refl);
    ++evals;
    if (fr < vals[best]) {
      const Vector exp = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(exp);
      ++evals;
      if (fe < fr) {
        pts[worst] = exp;
        vals[worst] = fe;
      } else {
        pts[worst] = refl;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = refl;
      vals[worst] = fr;
    } else {
      const Vector con = centroid + 0.5 * (pts[worst] - centroid);
      const double fc = f(con);
      ++evals;
      if (fc < vals[worst]) {
        pts[worst] = con;
        vals[worst] = fc;
      } else {
        for (std::size_t k = 1; k < order.size(); ++k) {
          const std::size_t j = order[k];
          pts[j] = pts[best] + 0.5 * (pts[j] - pts[best]);
          vals[j] = f(pts[j]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  return pts[static_cast<std::size_t>(it - vals.begin())];
}

} // namespace

std::string_view to_string(RateKind kind) {
  switch (kind) {
  case RateKind::Independence: return "independence";
  case RateKind::GaussianCopula: return "gaussian";
  case RateKind::Clayton: return "clayton";
  case RateKind::Gumbel: return "gumbel";
  case RateKind::StudentT: return "student_t";
  }
  return "unknown";
}

RateSpec RateSpec::independence(std::size_t d) {
  if (d == 0)
    throw std::invalid_argument("rate spec: dimension must be positive");
  RateSpec rs;
  rs.kind = RateKind::Independence;
  rs.d = d;
  return rs.with_tails(Vector::Ones(static_cast<Eigen::Index>(d)),
                       Vector::Ones(static_cast<Eigen::Index>(d)));
}

RateSpec RateSpec::gaussian(const Matrix &R) {
  validate_correlation(R);
  RateSpec rs = independence(static_cast<std::size_t>(R.rows()));
  rs.kind = RateKind::GaussianCopula;
  rs.R_inverse = spd_inverse(cholesky(R));
  return rs;
}

RateSpec RateSpec::clayton(std::size_t d, double theta) {
  if (!(theta > 0.0))
    throw std::invalid_argument("clayton rate: theta must be positive");
  RateSpec rs = independence(d);
  rs.kind = RateKind::Clayton;
  rs.theta = theta;
  return rs;
}

RateSpec RateSpec::gumbel(std::size_t d, double theta) {
  if (!(theta >= 1.0))
    throw std::invalid_argument("gumbel rate: theta must be at least 1");
  RateSpec rs = independence(d);
  rs.kind = RateKind::Gumbel;
  rs.theta = theta;
  return rs;
}

RateSpec RateSpec::student_t(std::size_t d, double dof) {
  if (!(dof > 0.0))
    throw std::invalid_argument("student-t rate: degrees of freedom must be positive");
  RateSpec rs = independence(d);
  rs.kind = RateKind::StudentT;
  rs.dof = dof;
  return rs;
}

RateSpec RateSpec::for_copula(const Copula &copula) {
  switch (copula.kind()) {
  case CopulaKind::Independence: return independence(copula.dimension());
  case CopulaKind::Gaussian: return gaussian(copula.correlation());
  case CopulaKind::Clayton: return clayton(copula.dimension(), copula.theta());
  }
  throw std::invalid_argument("no rate function available for this copula");
}

RateSpec &RateSpec::with_tails(Vector alpha_, Vector q_star_) {
  if (static_cast<std::size_t>(alpha_.size()) != d || static_cast<std::size_t>(q_star_.size()) != d)
    throw std::invalid_argument("rate spec: alpha and q* must have length d");
  alpha = std::move(alpha_);
  q_star = std::move(q_star_);
  return *this;
}

double rate_eval(const RateSpec &rs, const Vector &y) {
  if (static_cast<std::size_t>(y.size()) != rs.d)
    throw std::invalid_argument("rate_eval: dimension mismatch");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y(i) >= 0.0))
      throw std::domain_error("rate_eval: coordinates must be nonnegative");
  const double l1 = y.sum();
  const double linf = y.maxCoeff();
  const auto d = static_cast<double>(rs.d);
  switch (rs.kind) {
  case RateKind::Independence: return l1;
  case RateKind::GaussianCopula: {
    const Vector s = y.cwiseSqrt();
    return s.dot(rs.R_inverse * s);
  }
  case RateKind::Clayton: return (1.0 + rs.theta * d) * linf - rs.theta * l1;
  case RateKind::Gumbel: {
    if (linf == 0.0)
      return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      acc += std::pow(y(i) / linf, rs.theta);
    return linf * std::pow(acc, 1.0 / rs.theta);
  }
  case RateKind::StudentT: return (1.0 + d / rs.dof) * linf - l1 / rs.dof;
  }
  return 0.0;
}

double lambda_min(const std::vector<Marginal> &marginals, double x) {
  if (marginals.empty())
    throw std::invalid_argument("lambda_min: no marginals");
  double m = kInf;
  for (const Marginal &mg : marginals)
    m = std::min(m, mg.hazard(x));
  return m;
}

QStar q_star(const std::vector<Marginal> &marginals, double probe, double probe_check) {
  if (marginals.empty())
    throw std::invalid_argument("q_star: no marginals");
  const std::size_t d = marginals.size();
  QStar out;
  out.alpha.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    out.alpha(i) = marginals[i].alpha();
  out.heavy = std::any_of(marginals.begin(), marginals.end(),
                          [](const Marginal &m) { return m.heavy_tailed(); });

  double alpha_min = kInf;
  for (std::size_t i = 0; i < d; ++i)
    if (!out.heavy || marginals[i].heavy_tailed())
      alpha_min = std::min(alpha_min, out.alpha(i));

  auto ratios = [&](double level) {
    Vector h(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      const Marginal &m = marginals[i];
      if (out.heavy)
        h(i) = m.heavy_tailed() ? m.hazard_log_scale(level) : kInf;
      else
        h(i) = m.hazard(level);
    }
    const double hmin = h.minCoeff();
    Vector r(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      r(i) = std::isfinite(h(i)) ? std::pow(hmin / h(i), 1.0 / alpha_min) : 0.0;
    return Vector(r / r.maxCoeff());
  };

  Vector q1 = ratios(probe);
  Vector q2 = ratios(probe_check);
  for (std::size_t i = 0; i < d; ++i) {
    const bool steeper = !out.heavy || marginals[i].heavy_tailed()
                             ? out.alpha(i) > alpha_min * (1.0 + 1e-12)
                             : true;
    if (steeper && std::min(q1(i), q2(i)) < 1e-3) {
      q1(i) = 0.0;
      q2(i) = 0.0;
    }
    const double scale = std::max(q1(i), q2(i));
    if (scale > 0.0)
      out.max_rel_diff = std::max(out.max_rel_diff, std::fabs(q1(i) - q2(i)) / scale);
  }
  out.converged = out.max_rel_diff <= 0.05;
  out.q = q1;
  return out;
}

Vector network_theta_star(const std::vector<Marginal> &marginals) {
  const QStar qs = q_star(marginals);
  if (!qs.converged)
    throw std::runtime_error("network_theta_star: q* did not converge between probe levels");
  return qs.q / qs.q.sum();
}

double ray_scale(const RateSpec &rs, const LevelFn &G, const Vector &direction) {
  const Eigen::Index d = direction.size();
  Vector x(d);
  auto value = [&](double c) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double yi = c * direction(i);
      x(i) = rs.q_star(i) == 0.0 || yi == 0.0 ? 0.0 : rs.q_star(i) * std::pow(yi, 1.0 / rs.alpha(i));
    }
    const double g = G(x);
    return std::isnan(g) ? -kInf : g;
  };
  double lo;
  double hi;
  if (value(1.0) >= 1.0) {
    hi = 1.0;
    lo = 0.5;
    int k = 0;
    while (value(lo) >= 1.0) {
      hi = lo;
      lo *= 0.5;
      if (++k > 80)
        return 0.0;
    }
  } else {
    lo = 1.0;
    hi = 2.0;
    while (value(hi) < 1.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12)
        return kInf;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) >= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::size_t default_grid_steps(std::size_t d) {
  if (d <= 3)
    return 64;
  std::size_t steps = 64;
  while (steps > 1 && binomial(steps + d - 1, d - 1) > 20000.0)
    steps /= 2;
  return steps;
}

std::vector<DirectionScan> scan_directions(const RateSpec &rs, const LevelFn &G,
                                           std::size_t steps) {
  std::vector<Vector> dirs;
  std::vector<std::size_t> cur;
  if (rs.d == 1) {
    dirs.push_back(Vector::Ones(1));
  } else {
    simplex_points(rs.d, steps, cur, steps, dirs);
  }
  std::vector<DirectionScan> out;
  out.reserve(dirs.size());
  for (Vector &y : dirs) {
    const double c = ray_scale(rs, G, y);
    const double rate = std::isfinite(c) ? c * rate_eval(rs, y) : kInf;
    out.push_back({std::move(y), c, rate});
  }
  return out;
}

IStar exponent_Istar(const RateSpec &rs, const LevelFn &G) {
  const std::size_t steps = default_grid_steps(rs.d);
  std::vector<DirectionScan> scan = scan_directions(rs, G, steps);
  std::sort(scan.begin(), scan.end(),
            [](const DirectionScan &a, const DirectionScan &b) { return a.rate < b.rate; });
  IStar best;
  best.value = kInf;
  best.y = Vector::Zero(static_cast<Eigen::Index>(rs.d));
  if (scan.empty() || !std::isfinite(scan.front().rate))
    return best;

  best.value = scan.front().rate;
  best.y = scan.front().c * scan.front().direction;
  if (rs.d == 1)
    return best;

  auto f = [&](const Vector &w) { return direction_objective(rs, G, w); };
  const std::size_t starts = std::min<std::size_t>(3, scan.size());
  for (std::size_t s = 0; s < starts; ++s) {
    if (!std::isfinite(scan[s].rate))
      break;
    const Vector w = nelder_mead(f, scan[s].direction, 1.0 / static_cast<double>(steps), 2000);
    const double v = f(w);
    if (v < best.value) {
      best.value = v;
      const Vector y = w.cwiseAbs() / w.cwiseAbs().sum();
      best.y = ray_scale(rs, G, y) * y;
    }
  }
  return best;
}

LevelFn heavy_level_function(const LossModel &lm) {
  switch (lm.kind()) {
  case LossKind::LinearPortfolio:
  case LossKind::PiecewiseAffine: {
    // max over coordinates that carry positive weight somewhere
    const std::size_t d = lm.dimension();
    std::vector<char> active(d, 0);
    for (std::size_t i = 0; i < d; ++i) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
      e(static_cast<Eigen::Index>(i)) = 1.0;
      active[i] = lm.limit_eval(e) > 0.0;
    }
    return [active](const Vector &x) {
      double m = -kInf;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (active[static_cast<std::size_t>(i)])
          m = std::max(m, x(i));
      return m;
    };
  }
  default:
    // Difference quotient of log L*(e^{n x}) between n = 20 and n = 40; the
    // constant term of the expansion cancels.
    return [&lm](const Vector &x) {
      const double a = lm.limit_eval(Vector((20.0 * x).array().exp()));
      const double b = lm.limit_eval(Vector((40.0 * x).array().exp()));
      if (!(a > 0.0) || !(b > 0.0))
        return -kInf;
      return (std::log(b) - std::log(a)) / 20.0;
    };
  }
}

IStar exponent_Istar(const RateSpec &rs, const LossModel &lm, bool heavy) {
  if (lm.dimension() != rs.d)
    throw std::invalid_argument("exponent_Istar: loss and rate dimensions differ");
  if (heavy)
    return exponent_Istar(rs, heavy_level_function(lm));
  return exponent_Istar(rs, LevelFn([&lm](const Vector &x) { return lm.limit_eval(x); }));
}

} // namespace tailsampler
