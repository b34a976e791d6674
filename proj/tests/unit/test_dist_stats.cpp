#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lowdepth/dist_stats.hpp"
#include "lowdepth/ensembles.hpp"

namespace lowdepth {
namespace {

TEST(KNorm, PointMassAndUniform) {
  RealVector p = RealVector::Zero(8);
  p(5) = 1.0;
  EXPECT_DOUBLE_EQ(k_norm(OutputDistribution::from(p), 3), 1.0);
  EXPECT_NEAR(k_norm(OutputDistribution::uniform(3), 2), 1.0 / 8, 1e-15);
  EXPECT_THROW(OutputDistribution::from(RealVector::Constant(3, 1.0 / 3)), UsageError);
  EXPECT_THROW(OutputDistribution::from(RealVector::Constant(4, 0.3)), UsageError);
}

TEST(KNorm, HaarMeanClosedForm) {
  EXPECT_NEAR(haar_knorm_mean(3, 3), 6.0 / 90.0, 1e-15);
  EXPECT_NEAR(haar_knorm_mean(5, 2), 2.0 / 33.0, 1e-15);
  EXPECT_NEAR(knorm_reference(4, 3), 6.0 / 256.0, 1e-15);
}

TEST(KNorm, HaarMonteCarloMatchesClosedForm) {
  const auto r = far_from_uniform_report(Ensemble::global(6), 600, 1);
  MeanAccumulator k2, k3;
  for (const auto& c : r.circuits) {
    k2.add(c.knorm_2);
    k3.add(c.knorm_3);
  }
  EXPECT_NEAR(k2.mean(), haar_knorm_mean(6, 2), 3.0 * k2.std_error());
  EXPECT_NEAR(k3.mean(), haar_knorm_mean(6, 3), 3.0 * k3.std_error());
}

TEST(JointProbability, CollisionAndDistinct) {
  // Two draws: 2/(D(D+1)) for a repeat, 1/(D(D+1)) otherwise.
  EXPECT_NEAR(haar_joint_probability({3, 3}, 2), 2.0 / 20.0, 1e-15);
  EXPECT_NEAR(haar_joint_probability({1, 3}, 2), 1.0 / 20.0, 1e-15);
  double total = 0.0;
  for (std::uint64_t a = 0; a < 4; ++a)
    for (std::uint64_t b = 0; b < 4; ++b)
      for (std::uint64_t c = 0; c < 4; ++c) total += haar_joint_probability({a, b, c}, 2);
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(TvHaarUniform, KnownValues) {
  EXPECT_NEAR(tv_haar_vs_uniform(2, 2).tv_exact, 0.15, 1e-15);
  EXPECT_NEAR(tv_haar_vs_uniform(8, 2).tv_exact, 255.0 / (256.0 * 257.0), 1e-15);
  EXPECT_NEAR(tv_haar_vs_uniform(3, 1).tv_exact, 0.0, 1e-15);
}

TEST(TvHaarUniform, MatchesBruteForceTupleSum) {
  for (int n : {1, 2, 3})
    for (int N : {2, 3}) {
      const std::uint64_t d = pow2(n);
      std::uint64_t total = 1;
      for (int i = 0; i < N; ++i) total *= d;
      double tv = 0.0;
      for (std::uint64_t t = 0; t < total; ++t) {
        std::vector<std::uint64_t> s;
        for (std::uint64_t r = t, i = 0; i < static_cast<std::uint64_t>(N); ++i, r /= d) s.push_back(r % d);
        tv += std::abs(haar_joint_probability(s, n) - 1.0 / static_cast<double>(total));
      }
      EXPECT_NEAR(tv_haar_vs_uniform(n, N).tv_exact, 0.5 * tv, 1e-13) << n << "," << N;
    }
}

TEST(TvHaarUniform, BelowBoundAndDecreasingOnceDimensionExceedsNSquared) {
  for (int N = 1; N <= 4; ++N) {
    double prev = 1.0;
    for (int n = 1; n <= 10; ++n) {
      const auto r = tv_haar_vs_uniform(n, N);
      EXPECT_LE(r.tv_exact, r.paper_bound);
      if (pow2(n) >= static_cast<std::uint64_t>(N * N)) EXPECT_LE(r.tv_exact, prev + 1e-15) << n << "," << N;
      prev = r.tv_exact;
    }
  }
  EXPECT_THROW(tv_haar_vs_uniform(4, 5), CapError);
}

TEST(TvHaarUniform, NotMonotoneBelowNSquared) {
  // Three samples on two qubits are closer to uniform than on three qubits;
  // both values agree with the brute-force tuple sum above.
  EXPECT_LT(tv_haar_vs_uniform(2, 3).tv_exact, tv_haar_vs_uniform(3, 3).tv_exact);
}

TEST(TvToUniform, HadamardLayerIsUniform) {
  Circuit c(5);
  Layer l;
  for (int q = 0; q < 5; ++q) l.push_back(Gate::named(GateName::H, {q}));
  c.add_layer(l);
  const auto p = output_distribution(c);
  EXPECT_NEAR(tv_to_uniform(p), 0.0, 1e-14);
  EXPECT_NEAR(berger_tv_lower_bound(p), 0.0, 1e-14);
  EXPECT_NEAR(tv_to_uniform(output_distribution(Circuit(3))), 7.0 / 8.0, 1e-15);
}

TEST(TvToUniform, HaarMatchesPorterThomas) {
  // ½ E|X − 1| for X ~ Exp(1), by trapezoid quadrature on [0, 40].
  double integral = 0.0;
  const int steps = 400000;
  const double h = 40.0 / steps;
  for (int i = 0; i <= steps; ++i) {
    const double x = i * h, w = (i == 0 || i == steps) ? 0.5 : 1.0;
    integral += w * std::abs(x - 1.0) * std::exp(-x) * h;
  }
  const double pt = 0.5 * integral;
  const auto r = far_from_uniform_report(Ensemble::global(8), 40, 2);
  EXPECT_NEAR(r.mean_tv, pt, 0.02);
  EXPECT_DOUBLE_EQ(r.fraction_tv_ge_threshold, 1.0);
}

TEST(TvToUniform, BergerIsALowerBound) {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    RealVector p(static_cast<Eigen::Index>(pow2(n)));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = std::pow(rng.uniform(), 1 + trial % 5);
    p /= p.sum();
    const auto d = OutputDistribution::from(p);
    EXPECT_LE(berger_tv_lower_bound(d), tv_to_uniform(d) + 1e-15);
  }
}

TEST(FarFromUniform, DeterministicAndCsv) {
  const auto e = Ensemble::brickwork({6, 2, LocalKind::haar()});
  const auto a = far_from_uniform_report(e, 12, 4, 0.1, ExecPolicy{1});
  const auto b = far_from_uniform_report(e, 12, 4, 0.1, ExecPolicy{3});
  EXPECT_EQ(circuit_stats_csv(a.circuits), circuit_stats_csv(b.circuits));
  const std::string csv = circuit_stats_csv(a.circuits);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "circuit_seed,tv,berger,knorm_2,knorm_3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}

TEST(KnormProbe, TailVanishesForLargeThreshold) {
  const auto r = knorm_concentration_probe(Ensemble::brickwork({8, 2, LocalKind::haar()}), 2, 60, 1e6, 5);
  EXPECT_DOUBLE_EQ(r.tail_frequency, 0.0);
  EXPECT_NEAR(r.reference, 2.0 / 256.0, 1e-15);
  EXPECT_NEAR(r.chebyshev_bound, 4.0 / 256.0 / 1e12, 1e-25);
}

TEST(KnormProbe, IdentityIsAlwaysInTheTail) {
  const auto r = knorm_concentration_probe(Ensemble::identity(8), 2, 10, 0.5, 6);
  EXPECT_DOUBLE_EQ(r.tail_frequency, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_knorm, 1.0);
}

TEST(KnormProbe, HaarTailWithinChebyshev) {
  const int n = 8, k = 2;
  const double a = 0.5;
  const auto r = knorm_concentration_probe(Ensemble::global(n), k, 200, a, 7);
  EXPECT_NEAR(r.haar_mean, 2.0 / 257.0, 1e-15);
  EXPECT_LE(r.tail_frequency, r.chebyshev_bound + 3.0 * r.tail_std_error);
}

}  // namespace
}  // namespace lowdepth
