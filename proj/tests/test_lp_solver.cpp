#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tailsampler/lp_solver.hpp"
#include "tailsampler/rng.hpp"

namespace ts = tailsampler;
using ts::LpStatus;
using ts::Matrix;
using ts::Vector;

namespace {

// random row-stochastic matrix with zero diagonal; irreducible by a cyclic backbone
Matrix random_network(ts::RandomStream &s, int d) {
  Matrix A = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, (i + 1) % d) = 0.2 + s.uniform01();
    for (int j = 0; j < d; ++j)
      if (j != i && s.uniform01() < 0.4)
        A(i, j) += s.uniform01();
    A.row(i) /= A.row(i).sum();
  }
  return A;
}

// max c^T y over {M y <= 1, y >= 0} by solving every choice of d active
// constraints among the 2d and keeping the feasible ones
double vertex_enumeration(const Vector &c, const Matrix &M) {
  const int d = static_cast<int>(c.size());
  double best = -std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << (2 * d)); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != d)
      continue;
    Matrix G(d, d);
    Vector h(d);
    int r = 0;
    for (int k = 0; k < 2 * d; ++k) {
      if (!(mask & (1 << k)))
        continue;
      if (k < d) {
        G.row(r) = M.row(k);
        h(r) = 1.0;
      } else {
        G.row(r) = Vector::Unit(d, k - d).transpose();
        h(r) = 0.0;
      }
      ++r;
    }
    const Eigen::FullPivLU<Matrix> lu(G);
    if (lu.rank() < d)
      continue;
    const Vector y = lu.solve(h);
    if ((y.array() < -1e-9).any() || ((M * y).array() > 1.0 + 1e-9).any())
      continue;
    best = std::max(best, c.dot(y));
  }
  return best;
}

} // namespace

TEST(Simplex, OneDimensional) {
  const auto r = ts::solve_max(Vector::Constant(1, 0.7), Matrix::Ones(1, 1), Vector::Ones(1));
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, 0.7, 1e-15);
  EXPECT_NEAR(r.y(0), 1.0, 1e-15);
}

TEST(Simplex, TwoNodeExample) {
  Matrix A(2, 2);
  A << 0, 1, 1, 0;
  Vector D(2), s(2);
  D << 1, 0;
  s << 0, 3;
  const auto r = ts::network_lp(A, D, s);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_NEAR(r.y(0), 1.0, 1e-12);
  EXPECT_NEAR(r.y(1), 0.0, 1e-12);
}

TEST(Simplex, MatchesVertexEnumeration) {
  ts::RandomStream s(1, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Matrix A = random_network(s, 5);
    const Matrix M = Matrix::Identity(5, 5) - A;
    Vector c(5);
    for (int i = 0; i < 5; ++i)
      c(i) = 4 * s.uniform01() - 2;
    c.array() -= c.mean() + 0.1 + s.uniform01(); // bounded needs sum(c) < 0
    const auto r = ts::solve_max(c, M, Vector::Ones(5));
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.value, vertex_enumeration(c, M), 1e-8);
  }
}

TEST(Simplex, OptimalityCertificate) {
  ts::RandomStream s(2, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 3 + rep % 6;
    const Matrix A = random_network(s, d);
    const Matrix M = Matrix::Identity(d, d) - A;
    Vector c(d);
    for (int i = 0; i < d; ++i)
      c(i) = 2 * s.uniform01() - 1;
    c.array() -= c.mean() + 0.05;
    const auto r = ts::solve_max(c, M, Vector::Ones(d));
    ASSERT_EQ(r.status, LpStatus::Optimal);
    // primal feasibility
    EXPECT_GE(r.y.minCoeff(), 0.0);
    EXPECT_LE((M * r.y).maxCoeff(), 1.0 + 1e-9);
    // dual feasibility (reduced costs) and zero gap
    EXPECT_GE(r.dual.minCoeff(), -1e-9);
    EXPECT_GE((M.transpose() * r.dual - c).minCoeff(), -1e-9);
    EXPECT_NEAR(r.dual.sum(), r.value, 1e-8);
  }
}

TEST(Simplex, UnboundedExactlyWhenTotalExcessPositive) {
  // M 1 = 0 for stochastic A, so y = t 1 is a recession direction; for an
  // irreducible A it is the only one
  ts::RandomStream s(3, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Matrix A = random_network(s, 5);
    Vector D(5), sup(5);
    for (int i = 0; i < 5; ++i) {
      D(i) = 3 * s.uniform01();
      sup(i) = 3 * s.uniform01();
    }
    const double total = (D - sup).sum();
    const auto r = ts::network_lp(A, D, sup);
    if (total > 1e-9) {
      EXPECT_EQ(r.status, LpStatus::Unbounded);
      EXPECT_EQ(ts::network_loss(A, D, sup), std::numeric_limits<double>::infinity());
    } else if (total < -1e-9) {
      EXPECT_EQ(r.status, LpStatus::Optimal);
    }
  }
}

TEST(NetworkLoss, NoExcessNoFailure) {
  const Matrix A = ts::complete_network(4);
  Vector D(4), s(4);
  D << 0.5, 1, 0, 2;
  s << 1, 1, 1, 2;
  EXPECT_LE(ts::network_loss(A, D, s), 0.0 + 1e-12);
  EXPECT_FALSE(ts::network_failed(A, D, s, 1.0));
}

TEST(NetworkLoss, SingleExcessLowerBound) {
  const Matrix A = ts::complete_network(5);
  Vector D = Vector::Ones(5), s = Vector::Ones(5);
  D(0) += 2.0;
  s.array() += 0.6; // keep the total negative so the LP is bounded
  D(0) += 0.6;
  EXPECT_GE(ts::network_loss(A, D, s), 2.0 - 1e-12);
  // the literal (2, 0, ..., 0) excess has positive total, so the loss is +inf
  Vector E = Vector::Zero(5);
  E(0) = 2.0;
  EXPECT_GE(ts::network_loss(A, E, Vector::Zero(5)), 2.0);
}

TEST(NetworkLoss, SandwichProperty) {
  ts::RandomStream s(4, 0);
  const double k = 1.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Matrix A = rep % 2 ? random_network(s, 5) : ts::cyclic_network(5);
    Vector D(5), sup(5);
    for (int i = 0; i < 5; ++i) {
      D(i) = 4 * s.uniform01();
      sup(i) = 0.5 + 3 * s.uniform01();
    }
    const double loss = ts::network_loss(A, D, sup);
    const double excess = (D - sup).maxCoeff();
    if (excess > k)
      EXPECT_GT(loss, k);
    if (loss > k)
      EXPECT_GT(excess, 0.0);
    EXPECT_EQ(ts::network_failed(A, D, sup, k), loss > k);
  }
}

TEST(NetworkLoss, ScaleEquivariant) {
  ts::RandomStream s(5, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix A = random_network(s, 4);
    Vector D(4), sup(4);
    for (int i = 0; i < 4; ++i) {
      D(i) = 2 * s.uniform01();
      sup(i) = 1 + 2 * s.uniform01();
    }
    const double base = ts::network_loss(A, D, sup);
    if (!std::isfinite(base))
      continue;
    for (double c : {0.1, 3.0, 250.0})
      EXPECT_NEAR(ts::network_loss(A, c * D, c * sup), c * base, 1e-9 * std::max(1.0, c));
  }
}

TEST(Topology, BuildersAndChecks) {
  const Matrix C = ts::complete_network(4);
  EXPECT_DOUBLE_EQ(C(0, 1), 1.0 / 3.0);
  EXPECT_EQ(C(2, 2), 0.0);
  EXPECT_TRUE(ts::is_row_stochastic(C));
  EXPECT_TRUE(ts::is_irreducible(C));
  const Matrix Y = ts::cyclic_network(4);
  EXPECT_EQ(Y(3, 0), 1.0);
  EXPECT_EQ(Y(0, 1), 1.0);
  EXPECT_TRUE(ts::is_row_stochastic(Y));
  EXPECT_TRUE(ts::is_irreducible(Y));

  Matrix R(3, 3);
  R << 0, 1, 0, 1, 0, 0, 0.5, 0.5, 0; // node 2 is never reached
  EXPECT_TRUE(ts::is_row_stochastic(R));
  EXPECT_FALSE(ts::is_irreducible(R));
  R(0, 0) = 0.1;
  EXPECT_FALSE(ts::is_row_stochastic(R));
}

TEST(Simplex, RejectsNegativeRhs) {
  EXPECT_THROW(ts::solve_max(Vector::Ones(1), Matrix::Ones(1, 1), Vector::Constant(1, -1.0)),
               std::invalid_argument);
}
