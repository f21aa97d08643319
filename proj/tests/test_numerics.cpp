#include <gtest/gtest.h>

#include "support.hpp"

using namespace pamv;
using namespace pamv::test;

TEST(SpdSolve, IdentityReturnsRhs) {
  const std::vector<double> b{1, 2, 3};
  const auto x = spd_solve(SymMatrix::identity(3), b);
  EXPECT_EQ(x, b);
}

TEST(SpdSolve, TwoByTwoMatchesClosedFormInverse) {
  const auto a = SymMatrix::from_rows({{2, 1}, {1, 3}});
  const std::vector<double> b{1, 1};
  const auto x = spd_solve(a, b);
  // (1/5) [[3, -1], [-1, 2]] [1, 1]
  EXPECT_NEAR(x[0], 0.4, 1e-15);
  EXPECT_NEAR(x[1], 0.2, 1e-15);
}

TEST(SpdSolve, IndefiniteMatrixThrows) {
  const auto a = SymMatrix::from_rows({{1, 2}, {2, 1}});
  const std::vector<double> b{1, -1};
  EXPECT_THROW(spd_solve(a, b), NotPositiveDefinite);
  EXPECT_FALSE(is_positive_definite(a));
}

TEST(SpdSolve, ZeroMatrixThrows) {
  const std::vector<double> b{1, 1};
  EXPECT_THROW(spd_solve(SymMatrix(2), b), NotPositiveDefinite);
}

TEST(SpdSolve, RhsLengthMismatchThrows) {
  const std::vector<double> b{1, 1};
  EXPECT_THROW(spd_solve(SymMatrix::identity(3), b), DimensionMismatch);
}

TEST(SymMatrix, RejectsBadShapes) {
  EXPECT_THROW(SymMatrix(0), DimensionMismatch);
  EXPECT_THROW(SymMatrix::from_rows({{1, 2}, {3, 4}}), DimensionMismatch);
  EXPECT_THROW(SymMatrix::from_rows({{1, 2}, {2}}), DimensionMismatch);
}

TEST(SymMatrix, SymmetrizeAveragesTriangles) {
  SymMatrix a(2);
  a(0, 1) = 1.0;
  a(1, 0) = 3.0;
  EXPECT_FALSE(a.is_symmetric());
  a.symmetrize();
  EXPECT_EQ(a(0, 1), 2.0);
  EXPECT_EQ(a(1, 0), 2.0);
  EXPECT_TRUE(a.is_symmetric());
}

TEST(SpdSolveProperty, ResidualOnRandomSpd) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_spd(dim(rng), rng);
    std::vector<double> b(a.dim());
    for (double& v : b) v = n(rng);
    const auto x = spd_solve(a, b);
    const auto ax = a.multiply(x);
    ASSERT_LE(max_abs_diff(ax, b), 1e-8 * max_abs(b)) << "trial " << trial;
  }
}

TEST(SpdSolveProperty, ScalingTheMatrixScalesTheSolution) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> logc(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_spd(8, rng);
    const double c = std::pow(10.0, logc(rng));
    auto ca = a;
    ca *= c;
    const std::vector<double> b{1, -2, 3, 0.5, 0, 1, 1, -1};
    const auto x = spd_solve(a, b);
    const auto xc = spd_solve(ca, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_NEAR(xc[i], x[i] / c, 1e-10 * max_abs(x) / c);
    }
  }
}
