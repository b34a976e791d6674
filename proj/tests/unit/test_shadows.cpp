#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lowdepth/ensembles.hpp"
#include "lowdepth/shadows.hpp"

namespace lowdepth {
namespace {

Circuit random_clifford_prep(int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Circuit c(n);
  std::vector<int> all(n);
  for (int q = 0; q < n; ++q) all[q] = q;
  c.add_layer({Gate{all, sample_random_clifford(n, rng)}});
  return c;
}

TEST(LogDepthShadows, PatchSizes) {
  EXPECT_EQ(log_depth_xi(2), 1);
  EXPECT_EQ(log_depth_xi(8), 4);
  EXPECT_EQ(log_depth_xi(16), 6);
  EXPECT_EQ(log_depth_xi(64), 8);
  EXPECT_TRUE(Ensemble::brickwork(log_depth_shadow_spec(12)).is_clifford());
}

TEST(CollectShadows, IdentityEnsembleOnZeroGivesZero) {
  const auto snaps = collect_shadows(Circuit(5), Ensemble::identity(5), 50, 1);
  for (const auto& s : snaps) EXPECT_EQ(s.b, std::vector<int>(5, 0));
}

TEST(CollectShadows, DeterministicAcrossThreadCounts) {
  const auto e = Ensemble::brickwork(log_depth_shadow_spec(8));
  const auto a = collect_shadows(Circuit(8), e, 40, 2, ExecPolicy{1});
  const auto b = collect_shadows(Circuit(8), e, 40, 2, ExecPolicy{4});
  EXPECT_EQ(snapshots_to_ndjson(a), snapshots_to_ndjson(b));
  const auto c = collect_shadows(Circuit(8), e, 40, 3, ExecPolicy{1});
  EXPECT_NE(snapshots_to_ndjson(a), snapshots_to_ndjson(c));
}

TEST(CollectShadows, GlobalCliffordOutcomesAreUniform) {
  const int n = 4, bins = 16;
  const std::size_t N = 3200;
  const auto snaps = collect_shadows(Circuit(n), Ensemble::global(n, TwoQubitKind::Clifford), N, 4);
  std::vector<double> counts(bins, 0.0);
  for (const auto& s : snaps) {
    int x = 0;
    for (int q = 0; q < n; ++q) x |= s.b[q] << q;
    counts[x] += 1.0;
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(N) / bins;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  EXPECT_LT(chi2, 37.70);  // 0.999 quantile of chi-square with 15 dof
}

TEST(SnapshotValue, IdentityObservableIsExactlyOne) {
  const auto snaps = collect_shadows(random_clifford_prep(3, 5), Ensemble::global(3), 20, 6);
  const DenseObservable id{Matrix::Identity(8, 8)};
  for (const auto& s : snaps) EXPECT_NEAR(snapshot_value(s, id), 1.0, 1e-12);
}

TEST(SnapshotValue, BackendsAgreeWithDense) {
  const auto prep = random_clifford_prep(4, 7);
  const auto snaps = collect_shadows(prep, Ensemble::brickwork({4, 2, LocalKind::clifford()}), 30, 8);
  const PauliObservable pauli{PauliString::from_label("-XZIY")};
  const DenseObservable pauli_dense{pauli.pauli.dense()};
  const auto target = random_clifford_prep(4, 9);
  const StabilizerProjector proj{target};
  const Vector phi = run_dense(target, StateVector::zero(4)).amplitudes();
  const DenseObservable proj_dense{phi * phi.adjoint()};
  for (const auto& s : snaps) {
    EXPECT_NEAR(snapshot_value(s, pauli), snapshot_value(s, pauli_dense), 1e-10);
    EXPECT_NEAR(snapshot_value(s, proj), snapshot_value(s, proj_dense), 1e-10);
  }
}

TEST(Estimation, FidelityWithPreparedState) {
  const auto prep = random_clifford_prep(3, 10);
  const auto snaps = collect_shadows(prep, Ensemble::global(3, TwoQubitKind::Clifford), 4000, 11);
  const auto est = estimate_observable(snaps, StabilizerProjector{prep}, ShadowMethod::Mean);
  EXPECT_NEAR(est.value, 1.0, 3.0 * est.std_error);
}

TEST(Estimation, SingleQubitZOnLogDepthShadows) {
  Circuit flip(8);
  flip.add_layer({Gate::named(GateName::X, {0})});
  const auto e = Ensemble::brickwork(log_depth_shadow_spec(8));
  const auto snaps = collect_shadows(flip, e, 3000, 12);
  const auto est = estimate_observable(snaps, PauliObservable{PauliString::single(8, 0, 'Z')}, ShadowMethod::Mean);
  EXPECT_NEAR(est.value, -1.0, 3.0 * est.std_error);
}

TEST(Estimation, MedianOfMeansIgnoresBatchOrder) {
  RngStream rng(13, 0);
  std::vector<double> v(80);
  for (auto& x : v) x = rng.uniform() * 10 - 5;
  const auto a = estimate_from_values(v, ShadowMethod::MedianOfMeans, 8);
  std::vector<double> w;
  for (int k = 7; k >= 0; --k) w.insert(w.end(), v.begin() + 10 * k, v.begin() + 10 * (k + 1));
  const auto b = estimate_from_values(w, ShadowMethod::MedianOfMeans, 8);
  EXPECT_DOUBLE_EQ(a.value, b.value);
  EXPECT_EQ(a.batch_means.size(), 8u);
  EXPECT_EQ(default_batches(), 8);
  EXPECT_THROW(estimate_from_values({1.0, 2.0}, ShadowMethod::MedianOfMeans, 3), UsageError);
}

TEST(Estimation, MedianOfMeansRobustToOutlier) {
  std::vector<double> v(64, 1.0);
  v[3] = 1e6;
  EXPECT_DOUBLE_EQ(estimate_from_values(v, ShadowMethod::MedianOfMeans, 8).value, 1.0);
  EXPECT_GT(estimate_from_values(v, ShadowMethod::Mean).value, 1000.0);
}

TEST(BiasProbe, GlobalCliffordIsUnbiased) {
  const auto prep = random_clifford_prep(3, 14);
  const auto r = bias_probe(Ensemble::global(3, TwoQubitKind::Clifford), prep,
                            PauliObservable{PauliString::from_label("ZZI")}, 4000, 15, 0.0);
  EXPECT_TRUE(r.ci_contains_zero) << r.bias_estimate << " vs " << r.ci_halfwidth;
  EXPECT_DOUBLE_EQ(r.paper_bound, 0.0);
}

TEST(ShadowNorm, IdentityObservableHasUnitNorm) {
  const auto r = shadow_norm_empirical(Ensemble::global(2), DenseObservable{Matrix::Identity(4, 4)}, Circuit(2), 20, 16);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(ShadowNorm, GlobalThreeDesignValue) {
  // For a unitary 3-design and traceless O the second moment is
  // (D+1)/(D+2) (tr O² + 2 tr σO²); for O = Z_0 at σ = |0⟩⟨0| on 3 qubits
  // that is 9/10 (8 + 2) = 9.
  const ShadowObservable z0 = PauliObservable{PauliString::single(3, 0, 'Z')};
  const auto cl = shadow_norm_empirical(Ensemble::global(3, TwoQubitKind::Clifford), z0, Circuit(3), 3000, 17);
  const auto haar = shadow_norm_empirical(Ensemble::global(3), z0, Circuit(3), 3000, 18);
  EXPECT_NEAR(cl.value, 9.0, 3.0 * cl.std_error);
  EXPECT_NEAR(haar.value, 9.0, 3.0 * haar.std_error);
  EXPECT_LE(cl.value, 3.0 * 8.0);
}

TEST(Persistence, NdjsonRoundTrip) {
  const auto snaps = collect_shadows(Circuit(4), Ensemble::brickwork({4, 2, LocalKind::haar()}), 5, 19);
  const std::string text = snapshots_to_ndjson(snaps);
  const auto back = snapshots_from_ndjson(text);
  ASSERT_EQ(back.size(), snaps.size());
  EXPECT_EQ(snapshots_to_ndjson(back), text);
  for (std::size_t i = 0; i < snaps.size(); ++i) EXPECT_EQ(back[i].b, snaps[i].b);
  EXPECT_THROW(snapshots_from_ndjson("{\"circuit\": 1}\n"), UsageError);
}

}  // namespace
}  // namespace lowdepth
