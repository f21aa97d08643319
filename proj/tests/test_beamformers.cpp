#include <gtest/gtest.h>

#include "support.hpp"

using namespace pamv;
using namespace pamv::test;

TEST(Das, UniformWeights) {
  EXPECT_EQ(das_weight(4).values, std::vector<double>(4, 0.25));
  EXPECT_EQ(das_weight(1).values, std::vector<double>{1.0});
  for (std::size_t l : {3u, 7u, 64u}) EXPECT_NEAR(das_weight(l).sum(), 1.0, 1e-15);
  EXPECT_THROW(das_weight(0), InvalidSubarrayLength);
}

TEST(Mv, IdentityGivesUniformWeights) {
  for (std::size_t l : {1u, 2u, 16u, 64u}) {
    const auto w = mv_weight(SymMatrix::identity(l));
    for (double v : w.values) EXPECT_NEAR(v, 1.0 / static_cast<double>(l), 1e-12);
  }
}

TEST(Mv, TwoByTwoClosedForm) {
  const auto w = mv_weight(SymMatrix::from_rows({{2, 1}, {1, 3}}));
  EXPECT_NEAR(w.values[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w.values[1], 1.0 / 3.0, 1e-15);
}

TEST(Mv, DiagonalCovariance) {
  const auto w = mv_weight(SymMatrix::from_rows({{1, 0}, {0, 4}}));
  EXPECT_NEAR(w.values[0], 0.8, 1e-15);
  EXPECT_NEAR(w.values[1], 0.2, 1e-15);
}

TEST(Mv, NotPositiveDefinitePropagates) {
  EXPECT_THROW(mv_weight(SymMatrix(3)), NotPositiveDefinite);
}

TEST(MvProperty, ScaleInvariant) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_spd(10, rng);
    auto rc = r;
    rc *= 123.4;
    EXPECT_LE(max_abs_diff(mv_weight(r).values, mv_weight(rc).values), 1e-10);
  }
}

TEST(MvProperty, UnitSum) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> ld(2, 40);
  for (int trial = 0; trial < 500; ++trial) {
    EXPECT_NEAR(mv_weight(random_spd(ld(rng), rng)).sum(), 1.0, 1e-9);
  }
}

TEST(Sc, ZeroAlphaIsMv) {
  std::mt19937_64 rng(3);
  const auto r = random_spd(12, rng);
  EXPECT_EQ(sc_weight(r, 0.0, 10).values, mv_weight(r).values);
}

TEST(Sc, TwoByTwoBothClosedForms) {
  const double a = 2;
  const double b = 1;
  const double c = 1;
  const double d = 3;
  // w = (d - b, a - c) / (d - b - c + a)
  const double den = d - b - c + a;
  const std::vector<double> closed{(d - b) / den, (a - c) / den};
  const auto r = SymMatrix::from_rows({{a, b}, {c, d}});
  const auto sc = sc_weight(r, 5.0, 10);
  EXPECT_LE(max_abs_diff(sc.values, closed), 1e-12);
  EXPECT_LE(max_abs_diff(mv_weight(r).values, closed), 1e-12);
  EXPECT_EQ(sc.iterations_run, 10);
}

TEST(ScProperty, EquivalentToMv) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> ld(2, 32);
  for (double alpha : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto r = random_spd(ld(rng), rng);
      ASSERT_LE(max_abs_diff(sc_weight(r, alpha, 10).values, mv_weight(r).values), 1e-8)
          << "alpha " << alpha << " trial " << trial;
    }
  }
}

TEST(ScProperty, IndependentOfDirectionCount) {
  std::mt19937_64 rng(5);
  const auto r = random_spd(8, rng);
  EXPECT_LE(max_abs_diff(sc_weight(r, 1.0, 5, 1).values, sc_weight(r, 1.0, 5, 500).values), 1e-10);
}

TEST(Reweight, Reciprocals) {
  const std::vector<double> y{1, 0.5, 2};
  const auto d = reweight_diagonal(y, 1e-12);
  ASSERT_FALSE(d.all_zero());
  EXPECT_EQ(d.values(), (std::vector<double>{1, 2, 0.5}));
}

TEST(Reweight, FloorClampsZeros) {
  const std::vector<double> y{1, 0};
  const auto d = reweight_diagonal(y, 1e-12);
  EXPECT_EQ(d.values()[0], 1.0);
  EXPECT_DOUBLE_EQ(d.values()[1], 1e12);
}

TEST(Reweight, NegativeOutputsUseMagnitude) {
  const std::vector<double> y{-4, 2};
  EXPECT_EQ(reweight_diagonal(y, 1e-12).values(), (std::vector<double>{0.25, 0.5}));
}

TEST(Reweight, AllZeroOutputsMarker) {
  const std::vector<double> y{0, 0, 0};
  EXPECT_TRUE(reweight_diagonal(y, 1e-12).all_zero());
  const auto x = SnapshotMatrix::from_columns({{0, 0}, {0, 0}});
  EXPECT_TRUE(reweight_diagonal(x, das_weight(2), 1e-12).all_zero());
}

TEST(Msmv, ZeroBetaIsMv) {
  std::mt19937_64 rng(6);
  const auto r = random_spd(8, rng);
  const auto x = random_snapshots(8, 20, rng);
  MsmvConfig cfg;
  cfg.beta = 0.0;
  std::vector<std::vector<double>> its;
  const auto w = msmv_weight(r, x, cfg, &its);
  EXPECT_EQ(w.values, mv_weight(r).values);
  EXPECT_EQ(w.iterations_run, 10);
  EXPECT_EQ(its.size(), 11u);
}

TEST(Msmv, ZeroIterationsIsMv) {
  std::mt19937_64 rng(7);
  const auto r = random_spd(8, rng);
  const auto x = random_snapshots(8, 20, rng);
  MsmvConfig cfg;
  cfg.n_iter = 0;
  const auto w = msmv_weight(r, x, cfg);
  EXPECT_EQ(w.values, mv_weight(r).values);
  EXPECT_EQ(w.iterations_run, 0);
  EXPECT_EQ(w.method, Method::MSMV);
}

TEST(Msmv, OneIterationTwoByTwo) {
  const auto r = apply_dl(SymMatrix::identity(2), default_dl(2)); // 1.01 I
  const auto x = SnapshotMatrix::from_columns({{1, 0}});
  MsmvConfig cfg;
  cfg.beta = 1.0;
  cfg.n_iter = 1;
  const auto w = msmv_weight(r, x, cfg);
  // W0 = [1/2, 1/2]; x^T W0 = 1/2; D = 2; A = 1.01 I + 2 x x^T = diag(3.01, 1.01)
  const double u0 = 1.0 / 3.01;
  const double u1 = 1.0 / 1.01;
  EXPECT_NEAR(w.values[0], u0 / (u0 + u1), 1e-14);
  EXPECT_NEAR(w.values[1], u1 / (u0 + u1), 1e-14);
  EXPECT_EQ(w.iterations_run, 1);
}

TEST(Msmv, ValidatesConfigAndShapes) {
  const auto r = SymMatrix::identity(3);
  const auto x = SnapshotMatrix::from_columns({{1, 0}});
  EXPECT_THROW(msmv_weight(r, x, MsmvConfig{}), DimensionMismatch);
  MsmvConfig bad;
  bad.beta = -1.0;
  EXPECT_THROW(msmv_weight(SymMatrix::identity(2), x, bad), ConfigError);
  bad = MsmvConfig{};
  bad.epsilon_floor_rel = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Msmv, EarlyStopHaltsOnSmallStep) {
  std::mt19937_64 rng(8);
  const auto x = random_snapshots(6, 40, rng);
  const auto r = apply_dl(estimate(x), default_dl(6));
  MsmvConfig cfg;
  cfg.n_iter = 500;
  cfg.early_stop = true;
  cfg.early_stop_tol = 1e-3;
  const auto w = msmv_weight(r, x, cfg);
  EXPECT_LT(w.iterations_run, 500);
}

TEST(MsmvProperty, EveryIterateIsDistortionless) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> ld(2, 24);
  for (int trial = 0; trial < 200; ++trial) {
    const auto l = ld(rng);
    const auto x = random_snapshots(l, 3 * l, rng);
    const auto r = apply_dl(estimate(x), default_dl(l));
    std::vector<std::vector<double>> its;
    msmv_weight(r, x, MsmvConfig{}, &its);
    for (const auto& w : its) ASSERT_NEAR(sum(w), 1.0, 1e-9);
  }
}

TEST(MsmvProperty, ObjectiveDoesNotExceedInitializer) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> ld(2, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const auto l = ld(rng);
    const auto x = random_snapshots(l, 5 * l, rng);
    const auto r = apply_dl(estimate(x), default_dl(l));
    const auto w0 = mv_weight(r);
    const auto w = msmv_weight(r, x, MsmvConfig{});
    ASSERT_LE(msmv_objective(r, x, w.values, 1.0), msmv_objective(r, x, w0.values, 1.0) + 1e-9) << trial;
  }
}

TEST(MsmvProperty, ScalingDataIsScalingBeta) {
  // R ~ c^2 and X D X^T ~ c, so the weight for (cX, c^2 R, beta) equals the
  // weight for (X, R, beta / c).
  std::mt19937_64 rng(11);
  const auto x = random_snapshots(6, 30, rng);
  const auto r = apply_dl(estimate(x), default_dl(6));
  const double c = 4.0;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < x.n_cols(); ++j) {
    std::vector<double> col(x.col(j).begin(), x.col(j).end());
    for (double& v : col) v *= c;
    cols.push_back(col);
  }
  const auto xc = SnapshotMatrix::from_columns(cols);
  const auto rc = apply_dl(estimate(xc), default_dl(6));
  MsmvConfig cfg;
  cfg.beta = 2.0;
  const auto wc = msmv_weight(rc, xc, cfg);
  cfg.beta = 2.0 / c;
  const auto w = msmv_weight(r, x, cfg);
  EXPECT_LE(max_abs_diff(wc.values, w.values), 1e-9);
}

TEST(Output, SubarrayAverage) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto x = snapshots_from_vector(v, 2);
  EXPECT_DOUBLE_EQ(beamform_output(x, mv_weight(SymMatrix::identity(2))), 2.5);
}

TEST(Output, DistortionlessOnAllOnes) {
  const auto x = SnapshotMatrix::from_columns({{1, 1, 1}, {1, 1, 1}});
  const std::vector<double> w{0.7, -0.2, 0.5};
  EXPECT_DOUBLE_EQ(beamform_output(x, w), 1.0);
}

TEST(Output, ZeroSnapshots) {
  const SnapshotMatrix x(3, 4, 2);
  EXPECT_EQ(beamform_output(x, das_weight(3)), 0.0);
}

TEST(Output, UsesOnlyCentreBlock) {
  SnapshotMatrix x(1, 1, 1);
  x.col(0)[0] = 100.0;
  x.col(1)[0] = 2.0;
  x.col(2)[0] = -100.0;
  EXPECT_EQ(beamform_output(x, das_weight(1)), 2.0);
}

TEST(Output, LengthMismatchThrows) {
  const SnapshotMatrix x(3, 4, 0);
  EXPECT_THROW(beamform_output(x, das_weight(2)), DimensionMismatch);
}

TEST(Methods, ParseAndPrint) {
  for (auto m : {Method::DAS, Method::MV, Method::SC, Method::MSMV}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_EQ(parse_method("ms-mv"), Method::MSMV);
  EXPECT_THROW(parse_method("capon"), ConfigError);
}
