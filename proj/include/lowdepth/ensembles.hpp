#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/pfc.hpp"

namespace lowdepth {

inline constexpr int kMaxHaarQubits = 10;

// ------------------------------------------------------------------ samplers

/// Haar unitary on m qubits: complex Ginibre matrix, QR, and phase
/// correction by the diagonal of R.
inline Matrix sample_haar_unitary(int m, RngStream& rng) {
  detail::require(m >= 1, "sample_haar_unitary: m must be >= 1");
  detail::require_cap(m <= kMaxHaarQubits, "sample_haar_unitary: m exceeds dense cap");
  const auto d = static_cast<Eigen::Index>(pow2(m));
  std::normal_distribution<double> gauss;
  Matrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(i, j) = cplx(re, im);
    }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  for (Eigen::Index i = 0; i < d; ++i) {
    const cplx r = qr.matrixQR()(i, i);
    q.col(i) *= r / std::abs(r);
  }
  return q;
}

/// Haar orthogonal matrix on m qubits (real Ginibre, QR, sign correction).
inline Matrix sample_haar_orthogonal(int m, RngStream& rng) {
  detail::require(m >= 1, "sample_haar_orthogonal: m must be >= 1");
  detail::require_cap(m <= kMaxHaarQubits, "sample_haar_orthogonal: m exceeds dense cap");
  const auto d = static_cast<Eigen::Index>(pow2(m));
  std::normal_distribution<double> gauss;
  RealMatrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) z(i, j) = gauss(rng);
  Eigen::HouseholderQR<RealMatrix> qr(z);
  RealMatrix q = qr.householderQ();
  for (Eigen::Index i = 0; i < d; ++i)
    if (qr.matrixQR()(i, i) < 0) q.col(i) *= -1.0;
  return q.cast<cplx>();
}

/// Haar-random pure state on n qubits (normalised complex Gaussian vector).
inline Vector sample_haar_state(int n, RngStream& rng) {
  detail::require_cap(n >= 1 && n <= 24, "sample_haar_state: n out of range");
  const auto d = static_cast<Eigen::Index>(pow2(n));
  std::normal_distribution<double> gauss;
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = cplx(re, im);
  }
  return v / v.norm();
}

enum class TwoQubitKind { Haar, Clifford, Orthogonal };

inline Gate sample_gate(TwoQubitKind kind, std::vector<int> qubits, RngStream& rng) {
  const int m = static_cast<int>(qubits.size());
  switch (kind) {
    case TwoQubitKind::Haar: return Gate{std::move(qubits), DenseUnitary{sample_haar_unitary(m, rng)}};
    case TwoQubitKind::Orthogonal: return Gate{std::move(qubits), DenseUnitary{sample_haar_orthogonal(m, rng)}};
    case TwoQubitKind::Clifford: return Gate{std::move(qubits), sample_random_clifford(m, rng)};
  }
  throw UsageError("unknown gate kind");
}

/// Layer t of a 1D brickwork on qubits [offset, offset+m): even t pairs
/// (0,1),(2,3),..., odd t pairs (1,2),(3,4),...
inline Layer brickwork_layer(int m, int t, int offset, TwoQubitKind kind, RngStream& rng) {
  Layer layer;
  for (int a = t % 2; a + 1 < m; a += 2) layer.push_back(sample_gate(kind, {offset + a, offset + a + 1}, rng));
  return layer;
}

/// Alternating even/odd brickwork of random two-qubit gates on m qubits.
inline Circuit build_local_random_circuit(int m, int depth, RngStream& rng, TwoQubitKind kind = TwoQubitKind::Haar) {
  detail::require(m >= 2, "build_local_random_circuit: need at least 2 qubits");
  detail::require(depth >= 1, "build_local_random_circuit: depth must be >= 1");
  Circuit c(m);
  for (int t = 0; t < depth; ++t) c.add_layer(brickwork_layer(m, t, 0, kind, rng));
  return c;
}

// ----------------------------------------------------------------- brickwork

struct LocalKind {
  enum Type { Haar, Clifford, LocalRandomCircuit, PFC };
  Type type = Haar;
  int depth = 0;                // LocalRandomCircuit only
  std::uint64_t key_seed = 0;   // PFC only

  static LocalKind haar() { return {Haar, 0, 0}; }
  static LocalKind clifford() { return {Clifford, 0, 0}; }
  static LocalKind local_random_circuit(int depth) { return {LocalRandomCircuit, depth, 0}; }
  static LocalKind pfc(std::uint64_t key_seed) { return {PFC, 0, key_seed}; }

  std::string name() const {
    switch (type) {
      case Haar: return "haar";
      case Clifford: return "clifford";
      case LocalRandomCircuit: return "lrc";
      case PFC: return "pfc";
    }
    return "?";
  }
};

struct BrickworkSpec {
  int n = 0;
  int xi = 0;
  LocalKind local_kind;

  int num_patches() const { return xi > 0 ? n / xi : 0; }
};

struct Patch {
  int begin = 0;
  int size = 0;
};

/// Patches of size xi; the last absorbs the remainder when xi does not divide n.
inline std::vector<Patch> brickwork_patches(const BrickworkSpec& spec) {
  detail::require(spec.xi >= 1, "brickwork: xi must be >= 1");
  detail::require(spec.n >= 2 * spec.xi, "brickwork: n must be at least 2*xi");
  const int m = spec.num_patches();
  std::vector<Patch> patches;
  for (int j = 0; j < m; ++j) patches.push_back({j * spec.xi, spec.xi});
  patches.back().size = spec.n - patches.back().begin;
  return patches;
}

namespace detail {

inline void check_brickwork(const BrickworkSpec& spec) {
  const auto patches = brickwork_patches(spec);
  int widest = 0;
  for (std::size_t j = 0; j + 1 < patches.size(); ++j)
    widest = std::max(widest, patches[j].size + patches[j + 1].size);
  switch (spec.local_kind.type) {
    case LocalKind::Haar:
      require_cap(widest <= kMaxHaarQubits, "brickwork: Haar patch pair exceeds dense cap");
      break;
    case LocalKind::PFC:
      require_cap(widest <= kMaxDenseGateQubits, "brickwork: PFC patch pair exceeds dense cap");
      break;
    case LocalKind::Clifford:
      require_cap(widest <= 64, "brickwork: Clifford patch pair exceeds 64 qubits");
      break;
    case LocalKind::LocalRandomCircuit:
      require(spec.local_kind.depth >= 1, "brickwork: local random circuit depth must be >= 1");
      break;
  }
}

}  // namespace detail

/// Two staggered layers of small random unitaries. Unitary j acts on patches
/// j and j+1; even j form the first layer, odd j the second. With local
/// random circuits each small unitary is inlined as `depth` layers of
/// two-qubit gates, so each brick layer spans `depth` circuit layers.
inline Circuit build_brickwork(const BrickworkSpec& spec, RngStream& rng) {
  detail::check_brickwork(spec);
  const auto patches = brickwork_patches(spec);
  const int m = static_cast<int>(patches.size());
  const int sub_depth = spec.local_kind.type == LocalKind::LocalRandomCircuit ? spec.local_kind.depth : 1;
  Circuit c(spec.n);
  for (int parity = 0; parity < 2; ++parity) {
    std::vector<Layer> block(sub_depth);
    for (int j = parity; j + 1 < m; j += 2) {
      const int begin = patches[j].begin;
      const int width = patches[j].size + patches[j + 1].size;
      std::vector<int> qubits(width);
      for (int q = 0; q < width; ++q) qubits[q] = begin + q;
      switch (spec.local_kind.type) {
        case LocalKind::Haar:
          block[0].push_back(Gate{qubits, DenseUnitary{sample_haar_unitary(width, rng)}});
          break;
        case LocalKind::Clifford:
          block[0].push_back(Gate{qubits, sample_random_clifford(width, rng)});
          break;
        case LocalKind::PFC: {
          const PFCUnitary u(width, detail::mix2(spec.local_kind.key_seed, rng()));
          block[0].push_back(Gate{qubits, DenseUnitary{u.dense()}});
          break;
        }
        case LocalKind::LocalRandomCircuit:
          for (int t = 0; t < sub_depth; ++t) {
            Layer l = brickwork_layer(width, t, begin, TwoQubitKind::Haar, rng);
            for (auto& g : l) block[t].push_back(std::move(g));
          }
          break;
      }
    }
    for (auto& l : block)
      if (!l.empty()) c.add_layer(std::move(l));
  }
  return c;
}

// ----------------------------------------------------------------- ensembles

struct BrickworkEnsemble {
  BrickworkSpec spec;
};
struct LocalCircuitEnsemble {
  int n = 0;
  int depth = 0;
  TwoQubitKind kind = TwoQubitKind::Haar;
};
struct GlobalEnsemble {
  int n = 0;
  TwoQubitKind kind = TwoQubitKind::Haar;  // Haar, Clifford or Orthogonal on all qubits
};
struct IdentityEnsemble {
  int n = 0;
};
struct FixedEnsemble {
  Circuit circuit;
};

/// A distribution over n-qubit circuits.
class Ensemble {
 public:
  using Variant = std::variant<BrickworkEnsemble, LocalCircuitEnsemble, GlobalEnsemble, IdentityEnsemble, FixedEnsemble>;

  Ensemble(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  static Ensemble brickwork(BrickworkSpec spec) { return Ensemble(BrickworkEnsemble{spec}); }
  static Ensemble local_circuit(int n, int depth, TwoQubitKind kind = TwoQubitKind::Haar) {
    return Ensemble(LocalCircuitEnsemble{n, depth, kind});
  }
  static Ensemble global(int n, TwoQubitKind kind = TwoQubitKind::Haar) { return Ensemble(GlobalEnsemble{n, kind}); }
  static Ensemble identity(int n) { return Ensemble(IdentityEnsemble{n}); }
  static Ensemble fixed(Circuit c) { return Ensemble(FixedEnsemble{std::move(c)}); }

  int n() const {
    return std::visit(
        [](const auto& e) -> int {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, BrickworkEnsemble>) return e.spec.n;
          else if constexpr (std::is_same_v<T, FixedEnsemble>) return e.circuit.n();
          else return e.n;
        },
        v_);
  }

  bool is_clifford() const {
    return std::visit(
        [](const auto& e) -> bool {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, BrickworkEnsemble>) return e.spec.local_kind.type == LocalKind::Clifford;
          else if constexpr (std::is_same_v<T, LocalCircuitEnsemble>) return e.kind == TwoQubitKind::Clifford;
          else if constexpr (std::is_same_v<T, GlobalEnsemble>) return e.kind == TwoQubitKind::Clifford;
          else if constexpr (std::is_same_v<T, IdentityEnsemble>) return true;
          else return e.circuit.all_clifford();
        },
        v_);
  }

  Circuit sample(RngStream& rng) const {
    return std::visit(
        [&rng](const auto& e) -> Circuit {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, BrickworkEnsemble>) {
            return build_brickwork(e.spec, rng);
          } else if constexpr (std::is_same_v<T, LocalCircuitEnsemble>) {
            return build_local_random_circuit(e.n, e.depth, rng, e.kind);
          } else if constexpr (std::is_same_v<T, GlobalEnsemble>) {
            Circuit c(e.n);
            std::vector<int> all(e.n);
            for (int q = 0; q < e.n; ++q) all[q] = q;
            c.add_layer({sample_gate(e.kind, all, rng)});
            return c;
          } else if constexpr (std::is_same_v<T, IdentityEnsemble>) {
            return Circuit(e.n);
          } else {
            return e.circuit;
          }
        },
        v_);
  }

  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

}  // namespace lowdepth
