#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "tailsampler/is_core.hpp"

namespace ts = tailsampler;
using ts::Copula;
using ts::ISConfig;
using ts::JointModel;
using ts::LossModel;
using ts::Marginal;
using ts::Matrix;
using ts::Vector;

namespace {

Vector v2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

JointModel iid_exp(std::size_t d) {
  return JointModel(std::vector<Marginal>(d, Marginal::exponential()), Copula::independence(d));
}

Matrix numeric_jacobian(const Vector &x, double u, double l, double rho) {
  const Eigen::Index d = x.size();
  Matrix Jm(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x(j)));
    Vector a = x, b = x;
    a(j) += h;
    b(j) -= h;
    Jm.col(j) = (ts::transform(a, u, l, rho) - ts::transform(b, u, l, rho)) / (2 * h);
  }
  return Jm;
}

// P(X1 + X2 > t) for iid Exp(1)
double gamma2_tail(double t) { return std::exp(-t) * (1.0 + t); }

} // namespace

TEST(Kappa, Examples) {
  EXPECT_TRUE(ts::kappa(v2(1, 1), 1.0).isApprox(v2(1, 1)));
  const Vector k = ts::kappa(v2(std::exp(1.0) - 1.0, 0.0), 2.0);
  EXPECT_NEAR(k(0), 0.5, 1e-15);
  EXPECT_EQ(k(1), 0.0);
  const Vector k2 = ts::kappa(v2(3, 8), 1.0);
  EXPECT_NEAR(k2(0), 0.630930, 1e-6);
  EXPECT_NEAR(k2(0), std::log(4.0) / std::log(9.0), 1e-15);
  EXPECT_EQ(k2(1), 1.0);
  EXPECT_TRUE(ts::kappa(Vector::Zero(3), 1.0).isZero());
  // absolute values
  EXPECT_TRUE(ts::kappa(v2(-3, 8), 1.0).isApprox(k2));
}

TEST(Kappa, RangeAndMaximum) {
  ts::RandomStream s(1, 0);
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(4);
    for (int i = 0; i < 4; ++i)
      x(i) = 20 * s.uniform01() - 10;
    const double rho = 0.5 + 2 * s.uniform01();
    const Vector k = ts::kappa(x, rho);
    EXPECT_NEAR(k.maxCoeff(), 1.0 / rho, 1e-15);
    EXPECT_GE(k.minCoeff(), 0.0);
  }
}

TEST(Transform, Examples) {
  EXPECT_TRUE(ts::transform(v2(3, -2), 5.0, 5.0, 1.0).isApprox(v2(3, -2)));
  EXPECT_TRUE(ts::transform(v2(1, 1), 4.0, 1.0, 1.0).isApprox(v2(4, 4)));
  const Vector z = ts::transform(v2(3, 8), 9.0, 1.0, 1.0);
  EXPECT_NEAR(z(0), 12.0, 1e-12);
  EXPECT_NEAR(z(1), 72.0, 1e-12);
  EXPECT_THROW(ts::transform(v2(1, 1), 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST(Transform, SignAndMagnification) {
  ts::RandomStream s(2, 0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector x(3);
    for (int i = 0; i < 3; ++i)
      x(i) = 10 * s.uniform01() - 5;
    const double r = 1.0 + 50 * s.uniform01();
    const Vector z = ts::transform(x, r, 1.0, 1.0);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(std::signbit(z(i)), std::signbit(x(i)));
      EXPECT_GE(std::fabs(z(i)), std::fabs(x(i)));
    }
    EXPECT_GT(z.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff());
  }
}

TEST(Transform, OriginShift) {
  const JointModel jm({Marginal::pareto(2.0, 3.0), Marginal::exponential()},
                      Copula::independence(2));
  const Vector z = ts::transform(jm, v2(4, 1), 4.0, 1.0, 1.0);
  // x - o = (1, 1) maps to (4, 4)
  EXPECT_NEAR(z(0), 7.0, 1e-12);
  EXPECT_NEAR(z(1), 4.0, 1e-12);
}

TEST(Jacobian, Examples) {
  EXPECT_NEAR(ts::jacobian(v2(2, 7), 3.0, 3.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(ts::jacobian(Vector::Constant(1, 5.0), 16.0, 1.0, 2.0), 4.0, 1e-13);
  EXPECT_THROW(ts::jacobian(Vector::Zero(2), 2.0, 1.0, 1.0), std::domain_error);
}

TEST(Jacobian, MatchesFiniteDifferenceDeterminant) {
  ts::RandomStream s(3, 0);
  for (int d : {1, 2, 5})
    for (double r : {2.0, 10.0, 100.0})
      for (int rep = 0; rep < 30; ++rep) {
        Vector x(d);
        for (int i = 0; i < d; ++i)
          x(i) = 0.1 + 9.9 * s.uniform01();
        const double rho = rep % 2 ? 1.0 : 2.0;
        const double J = ts::jacobian(x, r, 1.0, rho);
        const double det = numeric_jacobian(x, r, 1.0, rho).determinant();
        EXPECT_LE(std::fabs(J - std::fabs(det)) / J, 1e-5) << "d=" << d << " r=" << r;
      }
}

TEST(LikelihoodRatio, Examples) {
  const JointModel jm = iid_exp(1);
  const Vector x = Vector::Constant(1, 1.0);
  EXPECT_NEAR(ts::likelihood_ratio(jm, x, x, 2.0, 2.0, 1.0), 1.0, 1e-15);
  const Vector z = ts::transform(jm, x, 4.0, 1.0, 1.0);
  EXPECT_NEAR(z(0), 4.0, 1e-14);
  const double direct = std::exp(-4.0) / std::exp(-1.0) * ts::jacobian(x, 4.0, 1.0, 1.0);
  EXPECT_NEAR(ts::likelihood_ratio(jm, x, z, 4.0, 1.0, 1.0), direct, 1e-15);
  EXPECT_NEAR(direct, 4.0 * std::exp(-3.0), 1e-15);
}

TEST(LikelihoodRatio, LogSpaceMatchesDirect) {
  const JointModel jm({Marginal::weibull(0.8), Marginal::normal(1, 2), Marginal::gamma(2.0)},
                      Copula::gaussian(ts::equicorrelation(3, 0.3)));
  ts::RandomStream s(4, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector x = jm.sample_joint(s);
    const double u = 5.0, l = 1.5;
    const Vector z = ts::transform(jm, x, u, l, 1.0);
    const double direct = std::exp(jm.log_density_joint(z)) / std::exp(jm.log_density_joint(x)) *
                          ts::jacobian(x - jm.origin(), u, l, 1.0);
    const double lr = ts::likelihood_ratio(jm, x, z, u, l, 1.0);
    if (std::isfinite(direct) && direct > 0)
      EXPECT_NEAR(lr, direct, 1e-10 * std::max(1.0, direct));
  }
}

TEST(LikelihoodRatio, OutsideSupportIsZero) {
  const JointModel jm = iid_exp(2);
  EXPECT_EQ(ts::likelihood_ratio(jm, v2(1, 1), v2(-1, 1), 2.0, 1.0, 1.0), 0.0);
}

TEST(Estimate, CertainEventDegenerateLevels) {
  ISConfig cfg;
  cfg.u = cfg.l = 1.0;
  cfg.n_samples = 500;
  const auto e = ts::estimate_is(iid_exp(2), ts::EventFn([](const Vector &) { return true; }), cfg);
  EXPECT_EQ(e.estimate, 1.0);
  EXPECT_EQ(e.sample_variance, 0.0);
  EXPECT_EQ(e.hit_count, 500u);
}

TEST(Estimate, ZeroHits) {
  ISConfig cfg;
  cfg.u = 10.0;
  cfg.l = 2.0;
  cfg.n_samples = 200;
  const auto e =
      ts::estimate_is(iid_exp(2), ts::EventFn([](const Vector &) { return false; }), cfg);
  EXPECT_EQ(e.estimate, 0.0);
  EXPECT_EQ(e.hit_count, 0u);
  EXPECT_EQ(e.relative_error, std::numeric_limits<double>::infinity());
}

TEST(Estimate, ExpSumExactOracle) {
  ISConfig cfg;
  cfg.u = 7.0;
  cfg.l = std::log(7.0);
  cfg.n_samples = 5000;
  cfg.seed = 42;
  const auto e = ts::estimate_is(iid_exp(2), LossModel::linear(v2(0.5, 0.5)), cfg);
  const double p = gamma2_tail(14.0);
  EXPECT_LE(std::fabs(e.estimate - p), 3 * e.standard_error());
  EXPECT_LE(e.relative_error, 0.15);
  EXPECT_NEAR(e.relative_error, e.standard_error() / e.estimate, 1e-15);
}

TEST(Estimate, RhoMismatchRejected) {
  ISConfig cfg;
  cfg.u = 7.0;
  cfg.l = 2.0;
  cfg.rho = 2.0;
  EXPECT_THROW(ts::estimate_is(iid_exp(2), LossModel::linear(v2(0.5, 0.5)), cfg),
               std::invalid_argument);
}

TEST(Estimate, AgreesWithNaiveAtModerateLevel) {
  const JointModel jm({Marginal::weibull(0.8), Marginal::weibull(1.2), Marginal::gamma(2.0)},
                      Copula::gaussian(ts::equicorrelation(3, 0.3)));
  Vector w(3);
  w << 1, 1, 1;
  const LossModel lm = LossModel::linear(w);
  const double u = 9.0;
  ISConfig cfg;
  cfg.u = u;
  cfg.l = 3.0;
  cfg.n_samples = 20000;
  cfg.seed = 7;
  const auto is = ts::estimate_is(jm, lm, cfg);
  const auto naive = ts::estimate_naive(jm, lm, u, 200000, 8);
  ASSERT_GE(naive.estimate, 1e-3);
  const double se = std::sqrt(is.sample_variance / is.n + naive.sample_variance / naive.n);
  EXPECT_LE(std::fabs(is.estimate - naive.estimate), 3 * se);
}

TEST(Naive, CertainImpossibleModerate) {
  const JointModel jm = iid_exp(2);
  const LossModel lm = LossModel::linear(v2(0.5, 0.5));
  EXPECT_EQ(ts::estimate_naive(jm, lm, -1.0, 100, 1).estimate, 1.0);
  EXPECT_EQ(ts::estimate_naive(jm, lm, 1e9, 100, 1).estimate, 0.0);
  const double u = 1.22;
  const auto e = ts::estimate_naive(jm, lm, u, 20000, 2);
  const double p = gamma2_tail(2 * u);
  EXPECT_NEAR(p, 0.3, 0.01);
  EXPECT_LE(std::fabs(e.estimate - p), 3 * std::sqrt(p * (1 - p) / 20000));
  EXPECT_NEAR(e.sample_variance, e.estimate * (1 - e.estimate), 1e-15);
}

TEST(Estimate, IndependentOfThreadCount) {
  const JointModel jm = iid_exp(2);
  const LossModel lm = LossModel::linear(v2(0.5, 0.5));
  ISConfig cfg;
  cfg.u = 6.0;
  cfg.l = 2.0;
  cfg.n_samples = 3001;
  cfg.chunk_size = 97;
  cfg.threads = 1;
  const auto a = ts::estimate_is(jm, lm, cfg);
  cfg.threads = 4;
  const auto b = ts::estimate_is(jm, lm, cfg);
  EXPECT_EQ(std::memcmp(&a.estimate, &b.estimate, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.sample_variance, &b.sample_variance, sizeof(double)), 0);
  EXPECT_EQ(a.hit_count, b.hit_count);
}

TEST(Replications, WelfordMatchesTwoPass) {
  std::vector<double> vals;
  const auto e = ts::run_replications(1000, 5, 64, 1, [&](ts::RandomStream &s, bool &hit) {
    hit = true;
    return 1e6 + s.uniform01();
  });
  double m = 0.0;
  for (std::size_t k = 0; k < 1000; ++k) {
    ts::RandomStream s(5, k);
    vals.push_back(1e6 + s.uniform01());
    m += vals.back();
  }
  m /= 1000;
  double v = 0.0;
  for (double x : vals)
    v += (x - m) * (x - m);
  v /= 999;
  EXPECT_NEAR(e.estimate, m, 1e-9);
  EXPECT_NEAR(e.sample_variance, v, 1e-9);
  EXPECT_NEAR(v, 1.0 / 12, 0.01);
}

TEST(Invert, Examples) {
  EXPECT_TRUE(ts::invert_transform(v2(3, -1), 2.0, 2.0, 1.0).isApprox(v2(3, -1)));
  const Vector x = ts::invert_transform(Vector::Constant(1, 8.0), 16.0, 1.0, 2.0);
  EXPECT_NEAR(x(0), 8.0 / 4.0, 1e-12);
}

TEST(Invert, RoundTrip) {
  ts::RandomStream s(6, 0);
  for (int rep = 0; rep < 300; ++rep) {
    const int d = 1 + rep % 5;
    Vector x(d);
    for (int i = 0; i < d; ++i)
      x(i) = 20 * s.uniform01() - 10;
    const double r = 1.5 + 100 * s.uniform01();
    const double rho = rep % 3 == 0 ? 2.0 : 1.0;
    const Vector z = ts::transform(x, r, 1.0, rho);
    const Vector back = ts::invert_transform(z, r, 1.0, rho);
    for (int i = 0; i < d; ++i)
      EXPECT_NEAR(back(i), x(i), 1e-8 * std::max(1.0, std::fabs(x(i))));
    const Vector again = ts::transform(back, r, 1.0, rho);
    for (int i = 0; i < d; ++i)
      EXPECT_NEAR(again(i), z(i), 1e-8 * std::max(1.0, std::fabs(z(i))));
  }
}

TEST(Crossval, SinglePointAndRejections) {
  const JointModel jm = iid_exp(2);
  const LossModel lm = LossModel::linear(v2(0.5, 0.5));
  ISConfig cfg;
  cfg.u = 5.0;
  cfg.n_samples = 500;
  const auto r = ts::crossvalidate_l(jm, lm, cfg, {1.7});
  EXPECT_EQ(r.best_l, 1.7);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_THROW(ts::crossvalidate_l(jm, lm, cfg, {1.0, 5.0}), std::invalid_argument);
  EXPECT_THROW(ts::crossvalidate_l(jm, lm, cfg, {}), std::invalid_argument);
}

TEST(Crossval, PicksSmallestVarianceWithCommonNumbers) {
  const JointModel jm = iid_exp(2);
  const LossModel lm = LossModel::linear(v2(0.5, 0.5));
  ISConfig cfg;
  cfg.u = 6.0;
  cfg.n_samples = 2000;
  cfg.seed = 3;
  const std::vector<double> grid = {0.5, 1.0, 1.8, 3.0, 4.5};
  const auto r = ts::crossvalidate_l(jm, lm, cfg, grid);
  double best = std::numeric_limits<double>::infinity();
  double best_l = 0;
  for (const auto &p : r.table) {
    ISConfig one = cfg;
    one.l = p.l;
    const auto e = ts::estimate_is(jm, lm, one);
    EXPECT_EQ(e.estimate, p.estimate.estimate); // same seed, same draws
    if (p.estimate.hit_count > 0 && p.estimate.sample_variance < best) {
      best = p.estimate.sample_variance;
      best_l = p.l;
    }
  }
  EXPECT_EQ(r.best_l, best_l);
}

TEST(Config, Validation) {
  ISConfig cfg;
  cfg.u = 1.0;
  cfg.l = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.l = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.l = 0.5;
  cfg.n_samples = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
