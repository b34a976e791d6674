#include <gtest/gtest.h>

#include <cmath>

#include "lowdepth/ensembles.hpp"
#include "lowdepth/protocols.hpp"

namespace lowdepth {
namespace {

TEST(LongRangeLayer, ConjugatesXIntoYZ) {
  for (double theta : {0.0, 0.3, kPi / 4, kPi / 2, 2.0}) {
    const Matrix u = unitary_of(long_range_layer(2, {1, 0}, theta));
    const Matrix x0 = PauliString::from_label("XI").dense(), y0z1 = PauliString::from_label("YZ").dense();
    const Matrix expect = std::cos(theta) * x0 + std::sin(theta) * y0z1;
    EXPECT_LT((u * x0 * u.adjoint() - expect).cwiseAbs().maxCoeff(), 1e-14) << theta;
  }
}

TEST(LongRangeLayer, OneGatePerUnorderedPair) {
  const auto c = long_range_layer(9, antipodal_partners(3), 1.0);
  EXPECT_EQ(c.gate_count(), 4u);
}

TEST(TimeReversal, ConfigValidation) {
  TimeReversalConfig cfg;
  cfg.depth = 2;
  EXPECT_THROW(time_reversal_experiment(cfg, true, 1), UsageError);
  cfg.depth = 1;
  cfg.partner = std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_THROW(time_reversal_experiment(cfg, true, 1), UsageError);
  cfg.partner.reset();
  cfg.side = 5;
  EXPECT_THROW(time_reversal_experiment(cfg, true, 1), CapError);
}

TEST(TimeReversal, NoLongRangeNeverFlipsFarawayQubits) {
  TimeReversalConfig cfg;
  cfg.runs = 2500;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    const auto r = time_reversal_experiment(cfg, false, seed);
    EXPECT_FALSE(r.faraway.empty());
    EXPECT_EQ(r.faraway_one_frequency, 0.0) << seed;
  }
}

TEST(TimeReversal, ZeroAngleIsInvisible) {
  TimeReversalConfig cfg;
  cfg.theta = 0.0;
  cfg.runs = 1000;
  EXPECT_EQ(time_reversal_experiment(cfg, true, 15).faraway_one_frequency, 0.0);
}

TEST(TimeReversal, QuarterTurnReachesThreshold) {
  TimeReversalConfig cfg;
  cfg.runs = 2000;
  const auto r = time_reversal_experiment(cfg, true, 16);
  EXPECT_NEAR(r.threshold, 2.0 / 3.0, 1e-15);
  EXPECT_GE(r.faraway_one_frequency, r.threshold - 3.0 * r.std_error);
}

TEST(TimeReversal, FrequencyNondecreasingInAngle) {
  TimeReversalConfig cfg;
  cfg.runs = 5000;
  double prev = 0.0, prev_se = 0.0;
  for (int s = 0; s <= 4; ++s) {
    cfg.theta = s * kPi / 8;
    const auto r = time_reversal_experiment(cfg, true, 17);
    EXPECT_GE(r.faraway_one_frequency, prev - 3.0 * std::hypot(r.std_error, prev_se)) << s;
    prev = r.faraway_one_frequency;
    prev_se = r.std_error;
  }
}

TEST(TimeReversal, DeterministicAcrossThreadCounts) {
  TimeReversalConfig cfg;
  cfg.runs = 300;
  const auto a = time_reversal_experiment(cfg, true, 18, ExecPolicy{1});
  const auto b = time_reversal_experiment(cfg, true, 18, ExecPolicy{3});
  EXPECT_EQ(a.faraway_one_frequency, b.faraway_one_frequency);
}

TEST(Purity, PureProductStateGivesOne) {
  RngStream rng(19, 0);
  const auto d = purity_distinguisher(PureStateSource{Ensemble::identity(4)}, 50, rng);
  EXPECT_EQ(d.statistic, 1.0);
  EXPECT_TRUE(d.decided_pure);
}

TEST(Purity, MixedStatisticMatchesPurity) {
  for (int n : {2, 8}) {
    RngStream rng(20, n);
    const std::size_t M = 200000;
    const auto d = purity_distinguisher(MaximallyMixedSource{n}, M, rng);
    // Outcomes are ±1 with mean 2^{-n}, so the standard error is at most 1/sqrt(M).
    EXPECT_NEAR(d.statistic, std::ldexp(1.0, -n), 3.0 / std::sqrt(static_cast<double>(M))) << n;
  }
}

TEST(Purity, PseudorandomBrickworkStatesAlwaysPure) {
  const auto e = Ensemble::brickwork({8, 2, LocalKind::pfc(21)});
  int pure = 0;
  for (int t = 0; t < 100; ++t) {
    RngStream rng(22, t);
    pure += purity_distinguisher(PureStateSource{e}, 20, rng).decided_pure ? 1 : 0;
  }
  EXPECT_EQ(pure, 100);
}

TEST(Purity, MixedSourceAccuracyAtTwentyPairs) {
  int correct = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(23, t);
    correct += purity_distinguisher(MaximallyMixedSource{8}, 20, rng).decided_pure ? 0 : 1;
  }
  EXPECT_GE(static_cast<double>(correct) / trials, 0.99);
}

}  // namespace
}  // namespace lowdepth
