#include <gtest/gtest.h>

#include <cmath>

#include "lowdepth/ensembles.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {
namespace {

Vector random_state(int n, RngStream& rng) { return sample_haar_state(n, rng); }

TEST(Dense, EmptyCircuitAndBitOrder) {
  RngStream rng(1, 0);
  const auto s = StateVector::from_amplitudes(random_state(3, rng));
  EXPECT_EQ((run_dense(Circuit(3), s).amplitudes() - s.amplitudes()).norm(), 0.0);
  Circuit x(3);
  x.add_layer({Gate::named(GateName::X, {0})});
  const auto out = run_dense(x, StateVector::zero(3));
  EXPECT_NEAR(std::abs(out.amplitudes()(1)), 1.0, 1e-15);
}

TEST(Dense, SwapIsInvolution) {
  RngStream rng(2, 0);
  const auto s = StateVector::from_amplitudes(random_state(4, rng));
  Circuit c(4);
  c.add_layer({Gate::named(GateName::SWAP, {0, 1})});
  c.add_layer({Gate::named(GateName::SWAP, {0, 1})});
  EXPECT_LT((run_dense(c, s).amplitudes() - s.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dense, GateOnNonContiguousQubitsMatchesKron) {
  RngStream rng(3, 0);
  const Matrix u = sample_haar_unitary(2, rng);
  // Gate on qubits (2, 0) of a 3-qubit register: local bit 0 -> qubit 2.
  Circuit c(3);
  c.add_layer({Gate{{2, 0}, DenseUnitary{u}}});
  // Oracle: permute to order (q2, q0, q1) as (local0, local1, spectator).
  const Matrix full = unitary_of(c);
  for (int col = 0; col < 8; ++col)
    for (int row = 0; row < 8; ++row) {
      const int lin = ((col >> 2) & 1) | (((col >> 0) & 1) << 1);
      const int lout = ((row >> 2) & 1) | (((row >> 0) & 1) << 1);
      const bool spect_same = ((row >> 1) & 1) == ((col >> 1) & 1);
      const cplx expect = spect_same ? u(lout, lin) : cplx(0);
      EXPECT_LT(std::abs(full(row, col) - expect), 1e-14);
    }
}

TEST(Dense, NormPreservedOverManyLayers) {
  RngStream rng(4, 0);
  Circuit c = build_local_random_circuit(8, 100, rng);
  const auto out = run_dense(c, StateVector::zero(8));
  EXPECT_LT(std::abs(out.amplitudes().norm() - 1.0), 1e-9);
}

TEST(Dense, CapEnforced) { EXPECT_THROW(StateVector::zero(21), CapError); }

TEST(Born, PointMassAndUniform) {
  RngStream rng(5, 0);
  const auto zero = StateVector::zero(3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(zero.born_sample(rng), 0u);
  Circuit h(2);
  h.add_layer({Gate::named(GateName::H, {0}), Gate::named(GateName::H, {1})});
  const RealVector p = run_dense(h, StateVector::zero(2)).probabilities();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p(i), 0.25, 1e-15);
}

TEST(Born, HaarStateCollisionMoment) {
  RngStream rng(6, 0);
  const int samples = 10000;
  double s = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const double v = sample_haar_state(3, rng).cwiseAbs2().squaredNorm();
    s += v;
    s2 += v * v;
  }
  const double mean = s / samples;
  const double se = std::sqrt((s2 / samples - mean * mean) / (samples - 1));
  EXPECT_NEAR(mean, 2.0 / 9.0, 3 * se);
}

TEST(ReducedDensity, ProductAndBell) {
  RngStream rng(7, 0);
  Circuit prod(3);
  prod.add_layer({Gate{{0}, DenseUnitary{sample_haar_unitary(1, rng)}}, Gate{{1}, DenseUnitary{sample_haar_unitary(1, rng)}}});
  const auto ps = run_dense(prod, StateVector::zero(3));
  EXPECT_NEAR(ps.purity({0}), 1.0, 1e-12);
  EXPECT_NEAR(ps.purity({1, 2}), 1.0, 1e-12);
  Circuit bell(2);
  bell.add_layer({Gate::named(GateName::H, {0})});
  bell.add_layer({Gate::named(GateName::CNOT, {0, 1})});
  const auto bs = run_dense(bell, StateVector::zero(2));
  EXPECT_NEAR(bs.purity({0}), 0.5, 1e-12);
  EXPECT_NEAR(bs.purity({1}), 0.5, 1e-12);
  const Matrix r = bs.reduced_density({0});
  EXPECT_LT((r - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReducedDensity, SubsetOrderIsRespected) {
  // |q0=1, q1=0>: reduced state on (1, 0) has local index 2.
  const auto s = StateVector::basis(2, 1);
  const Matrix r = s.reduced_density({1, 0});
  EXPECT_NEAR(r(2, 2).real(), 1.0, 1e-15);
}

TEST(Stabilizer, HadamardThenMeasure) {
  Circuit c(1);
  c.add_layer({Gate::named(GateName::H, {0})});
  const auto t = run_stabilizer(c, StabilizerTableau(1));
  const RealVector p = t.probabilities();
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_DOUBLE_EQ(p(1), 0.5);
}

TEST(Stabilizer, BellStabilizers) {
  Circuit c(2);
  c.add_layer({Gate::named(GateName::H, {0})});
  c.add_layer({Gate::named(GateName::CNOT, {0, 1})});
  const auto t = run_stabilizer(c, StabilizerTableau(2));
  EXPECT_DOUBLE_EQ(t.expectation(PauliString::from_label("+XX")), 1.0);
  EXPECT_DOUBLE_EQ(t.expectation(PauliString::from_label("+ZZ")), 1.0);
  EXPECT_DOUBLE_EQ(t.expectation(PauliString::from_label("+YY")), -1.0);
  EXPECT_DOUBLE_EQ(t.expectation(PauliString::from_label("+ZI")), 0.0);
}

TEST(Stabilizer, RejectsNonClifford) {
  Circuit c(1);
  c.add_layer({Gate::named(GateName::RZ, {0}, 0.1)});
  EXPECT_THROW(run_stabilizer(c, StabilizerTableau(1)), UsageError);
}

TEST(Stabilizer, AgreesWithDenseOnRandomCliffordCircuits) {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7;
    Circuit c = build_local_random_circuit(n, 1 + trial % 5, rng, TwoQubitKind::Clifford);
    if (trial % 3 == 0) {
      std::vector<int> all(n);
      for (int q = 0; q < n; ++q) all[q] = q;
      c.add_layer({Gate{all, sample_random_clifford(n, rng)}});
    }
    const RealVector pd = run_dense(c, StateVector::zero(n)).probabilities();
    const auto t = run_stabilizer(c, StabilizerTableau(n));
    const RealVector ps = t.probabilities();
    EXPECT_LT((pd - ps).cwiseAbs().sum(), 1e-10) << "trial " << trial;
    EXPECT_NEAR(t.collision_mass(), pd.squaredNorm(), 1e-10);
    for (std::uint64_t x = 0; x < 4 && x < pow2(n); ++x)
      EXPECT_NEAR(t.probability_of(bits_of(x, n)), pd(static_cast<Eigen::Index>(x)), 1e-12);
  }
}

TEST(Stabilizer, ExpectationsMatchDense) {
  RngStream rng(9, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    Circuit c(n);
    c.add_layer({Gate{{0, 1, 2}, sample_random_clifford(3, rng)}});
    const auto t = run_stabilizer(c, StabilizerTableau(n));
    const Vector psi = run_dense(c, StateVector::zero(n)).amplitudes();
    for (const char* l : {"+XYZ", "+ZZI", "-IXY", "+YYY", "+ZIZ"}) {
      const auto p = PauliString::from_label(l);
      const double dense = (psi.adjoint() * p.dense() * psi)(0, 0).real();
      EXPECT_NEAR(t.expectation(p), dense, 1e-10) << l;
    }
  }
}

TEST(Stabilizer, SamplesAreInSupport) {
  RngStream rng(10, 0);
  Circuit c = build_local_random_circuit(6, 4, rng, TwoQubitKind::Clifford);
  const auto t = run_stabilizer(c, StabilizerTableau(6));
  const RealVector p = t.probabilities();
  for (int i = 0; i < 50; ++i) {
    const auto b = t.sample(rng);
    std::uint64_t x = 0;
    for (int q = 0; q < 6; ++q) x |= static_cast<std::uint64_t>(b[q]) << q;
    EXPECT_GT(p(static_cast<Eigen::Index>(x)), 0.0);
  }
}

TEST(Lightcone, ConjugatedOperatorSupportedInCone) {
  RngStream rng(11, 0);
  const int n = 6;
  const Circuit c = build_local_random_circuit(n, 2, rng);
  const Matrix u = unitary_of(c);
  for (int i : {0, 2, 5}) {
    const Matrix o = u * PauliString::single(n, i, 'X').dense() * u.adjoint();
    const auto cone = lightcone(c, {i});
    // Off-cone qubits must act trivially: O commutes with every Pauli outside the cone.
    for (int q = 0; q < n; ++q) {
      if (cone.count(q)) continue;
      for (char op : {'X', 'Z'}) {
        const Matrix p = PauliString::single(n, q, op).dense();
        EXPECT_LT((o * p - p * o).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

}  // namespace
}  // namespace lowdepth
