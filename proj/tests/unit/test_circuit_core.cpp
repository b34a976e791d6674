#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "lowdepth/circuit.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/pfc.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {
namespace {

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double s = 0, s2 = 0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double mean = s / n;
  const double var = (s2 - n * mean * mean) / (n - 1);
  return {mean, std::sqrt(var / n)};
}

// ------------------------------------------------------------------- Pauli

TEST(Pauli, LabelRoundTripAndHermiticity) {
  for (std::string s : {"+XYZI", "-YY", "+I", "-Z"}) {
    const auto p = PauliString::from_label(s);
    EXPECT_TRUE(p.is_hermitian());
    EXPECT_EQ(p.label(), s);
  }
}

TEST(Pauli, ProductsMatchDenseMatrices) {
  const char* labels[] = {"+XY", "-ZX", "+YY", "+IZ", "-XI"};
  for (const char* a : labels)
    for (const char* b : labels) {
      const auto pa = PauliString::from_label(a), pb = PauliString::from_label(b);
      const Matrix prod = pa.dense() * pb.dense();
      EXPECT_LT(((pa * pb).dense() - prod).cwiseAbs().maxCoeff(), 1e-15);
      const bool commute = (pa.dense() * pb.dense() - pb.dense() * pa.dense()).cwiseAbs().maxCoeff() < 1e-12;
      EXPECT_EQ(pa.commutes_with(pb), commute);
    }
}

// ---------------------------------------------------------------- Clifford

TEST(Clifford, NamedTableauxMatchDenseConjugation) {
  for (GateName g : {GateName::H, GateName::S, GateName::Sdg, GateName::X, GateName::Y, GateName::Z, GateName::CNOT,
                     GateName::CZ, GateName::SWAP}) {
    const Matrix u = named_dense({g, 0});
    const CliffordElement c = named_clifford(g);
    const int m = gate_arity(g);
    for (int q = 0; q < m; ++q)
      for (char op : {'X', 'Z'}) {
        const auto p = PauliString::single(m, q, op);
        const Matrix lhs = u * p.dense() * u.adjoint();
        EXPECT_LT((lhs - c.conjugate(p).dense()).cwiseAbs().maxCoeff(), 1e-12) << gate_name_str(g);
      }
  }
}

TEST(Clifford, DenseFormConjugatesLikeTableau) {
  RngStream rng(11, 0);
  for (int m = 1; m <= 4; ++m)
    for (int trial = 0; trial < 5; ++trial) {
      const auto c = sample_random_clifford(m, rng);
      const Matrix u = c.dense();
      EXPECT_LT(unitarity_defect(u), 1e-10);
      for (int q = 0; q < m; ++q)
        for (char op : {'X', 'Z', 'Y'}) {
          const auto p = PauliString::single(m, q, op);
          EXPECT_LT((u * p.dense() * u.adjoint() - c.conjugate(p).dense()).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Clifford, SamplesAreValidTableaux) {
  RngStream rng(3, 1);
  for (int m : {1, 2, 5, 17, 64}) {
    const auto c = sample_random_clifford(m, rng);
    EXPECT_TRUE(c.is_valid()) << m;
  }
}

TEST(Clifford, InverseAndComposition) {
  RngStream rng(5, 2);
  for (int m = 1; m <= 6; ++m) {
    const auto c = sample_random_clifford(m, rng);
    EXPECT_EQ(c.after(c.inverse()), CliffordElement(m));
    EXPECT_EQ(c.inverse().after(c), CliffordElement(m));
    const auto d = sample_random_clifford(m, rng);
    if (m <= 3) {
      const Matrix lhs = d.after(c).dense();
      const Matrix rhs = d.dense() * c.dense();
      EXPECT_LT(phase_aligned_deviation(lhs, rhs), 1e-10);
    }
  }
}

TEST(Clifford, SingleQubitUniformOver24Elements) {
  RngStream rng(2024, 0);
  const int draws = 10000;
  std::map<std::string, int> counts;
  for (int i = 0; i < draws; ++i) {
    const auto c = sample_random_clifford(1, rng);
    counts[c.x_image(0).label() + c.z_image(0).label()]++;
  }
  ASSERT_EQ(counts.size(), 24u);
  const double p = 1.0 / 24;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& [key, cnt] : counts) EXPECT_NEAR(cnt, draws * p, 3 * sigma) << key;
}

TEST(Clifford, TwoQubitFramePotentialIsTwo) {
  RngStream rng(99, 0);
  std::vector<double> vals;
  for (int i = 0; i < 10000; ++i) {
    const Matrix u = sample_random_clifford(2, rng).dense();
    const Matrix v = sample_random_clifford(2, rng).dense();
    vals.push_back(std::pow(std::abs((u.adjoint() * v).trace()), 4));
  }
  const auto s = mean_se(vals);
  EXPECT_NEAR(s.mean, 2.0, 3 * s.se);
}

TEST(Clifford, SynthesisReproducesTableauAndUnitary) {
  RngStream rng(17, 0);
  for (int m = 1; m <= 7; ++m)
    for (int trial = 0; trial < 6; ++trial) {
      const auto c = sample_random_clifford(m, rng);
      const Circuit circ = synthesize_clifford(c);
      EXPECT_EQ(circuit_clifford(circ), c);
      for (const auto& l : circ.layers())
        for (const auto& g : l) EXPECT_EQ(g.kind(), "named");
      if (m <= 4) EXPECT_LT(phase_aligned_deviation(unitary_of(circ), c.dense()), 1e-10);
    }
}

// ------------------------------------------------------------------- Gates

TEST(Gate, Validation) {
  EXPECT_THROW(Gate::named(GateName::CNOT, {1, 1}), UsageError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 2;
  EXPECT_THROW(Gate::dense({0}, bad), NumericalError);
  Circuit c(3);
  c.add_layer({Gate::named(GateName::H, {0})});
  EXPECT_THROW(c.add_layer({Gate::named(GateName::H, {1}), Gate::named(GateName::CNOT, {1, 2})}), UsageError);
  EXPECT_THROW(c.add_layer({Gate::named(GateName::H, {3})}), UsageError);
}

TEST(Gate, InverseCircuitUndoes) {
  RngStream rng(4, 4);
  Circuit c = build_local_random_circuit(4, 3, rng);
  c.add_layer({Gate::named(GateName::RZ, {0}, 0.3), Gate::named(GateName::S, {1}), Gate::named(GateName::RZZ, {2, 3}, 1.1)});
  Circuit both = c;
  both.append(c.inverse());
  EXPECT_LT(phase_aligned_deviation(unitary_of(both), Matrix::Identity(16, 16)), 1e-10);
}

// ----------------------------------------------------------------- Samplers

TEST(Haar, UnitarityAndLowMoments) {
  RngStream rng(1, 0);
  std::vector<double> m2, m4;
  for (int i = 0; i < 100000; ++i) {
    const Matrix u = sample_haar_unitary(1, rng);
    if (i < 100) EXPECT_LE(unitarity_defect(u), 1e-10);
    const double p = std::norm(u(0, 0));
    m2.push_back(p);
    m4.push_back(p * p);
  }
  const auto a = mean_se(m2), b = mean_se(m4);
  EXPECT_NEAR(a.mean, 0.5, 3 * a.se);
  EXPECT_NEAR(b.mean, 1.0 / 3, 3 * b.se);
}

TEST(Haar, OrthogonalIsRealOrthogonal) {
  RngStream rng(1, 1);
  for (int m = 1; m <= 3; ++m) {
    const Matrix o = sample_haar_orthogonal(m, rng);
    EXPECT_LT(o.imag().cwiseAbs().maxCoeff(), 1e-300 + 0.0);
    EXPECT_LT(unitarity_defect(o), 1e-10);
  }
}

TEST(Haar, CapEnforced) {
  RngStream rng(1, 2);
  EXPECT_THROW(sample_haar_unitary(kMaxHaarQubits + 1, rng), CapError);
}

// ---------------------------------------------------------------- Brickwork

std::vector<std::vector<std::vector<int>>> supports(const Circuit& c) {
  std::vector<std::vector<std::vector<int>>> out;
  for (const auto& l : c.layers()) {
    out.emplace_back();
    for (const auto& g : l) out.back().push_back(g.qubits);
  }
  return out;
}

TEST(Brickwork, FourQubitsXiOne) {
  RngStream rng(7, 0);
  const Circuit c = build_brickwork({4, 1, LocalKind::haar()}, rng);
  const std::vector<std::vector<std::vector<int>>> expected = {{{0, 1}, {2, 3}}, {{1, 2}}};
  EXPECT_EQ(supports(c), expected);
  EXPECT_EQ(c.gate_count(), 3u);
}

TEST(Brickwork, SinglePatchPair) {
  RngStream rng(7, 1);
  const Circuit c = build_brickwork({6, 3, LocalKind::haar()}, rng);
  ASSERT_EQ(c.depth(), 1);
  ASSERT_EQ(c.layers()[0].size(), 1u);
  EXPECT_EQ(c.layers()[0][0].arity(), 6);
}

TEST(Brickwork, RemainderAbsorbedByLastPatch) {
  RngStream rng(7, 2);
  const Circuit c = build_brickwork({7, 2, LocalKind::clifford()}, rng);
  // patches [0,2) [2,4) [4,7): unitaries on 0..3 (layer 1), 2..6 (layer 2)
  const std::vector<std::vector<std::vector<int>>> expected = {{{0, 1, 2, 3}}, {{2, 3, 4, 5, 6}}};
  EXPECT_EQ(supports(c), expected);
}

TEST(Brickwork, UnitCountIsPatchesMinusOne) {
  RngStream rng(8, 0);
  for (int n = 2; n <= 13; ++n)
    for (int xi = 1; 2 * xi <= n; ++xi) {
      const Circuit c = build_brickwork({n, xi, LocalKind::clifford()}, rng);
      EXPECT_EQ(static_cast<int>(c.gate_count()), n / xi - 1);
      EXPECT_LE(c.depth(), 2);
    }
}

TEST(Brickwork, CliffordKindHasTableauGatesAndDepthMetadata) {
  RngStream rng(9, 0);
  const Circuit c = build_brickwork({6, 1, LocalKind::clifford()}, rng);
  int max_depth = 0;
  for (const auto& l : c.layers())
    for (const auto& g : l) {
      EXPECT_EQ(g.kind(), "clifford");
      max_depth = std::max(max_depth, synthesize_clifford(g.as_clifford()).depth());
    }
  EXPECT_GT(max_depth, 0);
}

TEST(Brickwork, LocalRandomCircuitKindInlinesLayers) {
  RngStream rng(9, 1);
  const Circuit c = build_brickwork({8, 2, LocalKind::local_random_circuit(3)}, rng);
  EXPECT_EQ(c.depth(), 6);
  EXPECT_EQ(c.max_gate_arity(), 2);
}

TEST(Brickwork, PfcKindIsUnitary) {
  RngStream rng(9, 2);
  const Circuit c = build_brickwork({6, 2, LocalKind::pfc(42)}, rng);
  EXPECT_EQ(c.gate_count(), 2u);
  EXPECT_LT(unitarity_defect(unitary_of(c)), 1e-10);
}

TEST(Brickwork, Reproducible) {
  RngStream a(123, 5), b(123, 5);
  const Matrix ua = unitary_of(build_brickwork({6, 2, LocalKind::haar()}, a));
  const Matrix ub = unitary_of(build_brickwork({6, 2, LocalKind::haar()}, b));
  EXPECT_EQ((ua - ub).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Brickwork, RejectsTooFewQubits) {
  RngStream rng(1, 1);
  EXPECT_THROW(build_brickwork({3, 2, LocalKind::haar()}, rng), UsageError);
}

TEST(LocalRandomCircuit, Layout) {
  RngStream rng(10, 0);
  const std::vector<std::vector<std::vector<int>>> d1 = {{{0, 1}, {2, 3}}};
  EXPECT_EQ(supports(build_local_random_circuit(4, 1, rng)), d1);
  const std::vector<std::vector<std::vector<int>>> d2 = {{{0, 1}, {2, 3}}, {{1, 2}}};
  EXPECT_EQ(supports(build_local_random_circuit(4, 2, rng)), d2);
}

// ---------------------------------------------------------------------- PFC

TEST(Pfc, PermutationIsBijectiveAndInvertible) {
  for (int n : {1, 2, 5, 8}) {
    const FeistelPermutation p(n, 77);
    std::set<std::uint64_t> images;
    for (std::uint64_t x = 0; x < pow2(n); ++x) {
      const auto y = p.forward(x);
      EXPECT_LT(y, pow2(n));
      images.insert(y);
      EXPECT_EQ(p.inverse(y), x);
    }
    EXPECT_EQ(images.size(), pow2(n));
  }
}

TEST(Pfc, PhaseSquaresToIdentityAndUnitary) {
  const auto u = build_pfc(3, 5);
  const Matrix f = u.phase_dense();
  EXPECT_LT((f * f - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(unitarity_defect(u.dense()), 1e-10);
  EXPECT_LT(phase_aligned_deviation(unitary_of(u.to_circuit()), u.dense()), 1e-10);
}

// ---------------------------------------------------------------- Lightcone

TEST(Lightcone, Examples) {
  EXPECT_EQ(lightcone(Circuit(4), {2}), (std::set<int>{2}));
  Circuit one(2);
  one.add_layer({Gate::named(GateName::CNOT, {0, 1})});
  EXPECT_EQ(lightcone(one, {0}), (std::set<int>{0, 1}));
  RngStream rng(1, 0);
  const Circuit bw = build_local_random_circuit(8, 2, rng);
  const auto cone = lightcone(bw, {3});
  EXPECT_EQ(cone, (std::set<int>{1, 2, 3, 4}));
  EXPECT_LE(cone.size(), 2u * 2 + 1);
}

TEST(Lightcone, BoundedByTwiceDepthPlusInput) {
  RngStream rng(2, 0);
  for (int depth = 1; depth <= 5; ++depth) {
    const Circuit c = build_local_random_circuit(16, depth, rng, TwoQubitKind::Clifford);
    for (int q = 0; q < 16; ++q) EXPECT_LE(static_cast<int>(lightcone(c, {q}).size()), 2 * depth + 1);
  }
}

}  // namespace
}  // namespace lowdepth
