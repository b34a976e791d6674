#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"

namespace lowdepth {

inline constexpr int kMaxDenseGateQubits = 12;
inline constexpr double kUnitarityTol = 1e-10;

enum class GateName { H, S, Sdg, X, Y, Z, CNOT, CZ, SWAP, RZ, RZZ };

struct NamedGate {
  GateName name = GateName::H;
  double angle = 0.0;  // radians; RZ and RZZ only

  bool operator==(const NamedGate& o) const { return name == o.name && angle == o.angle; }
};

inline const char* gate_name_str(GateName g) {
  switch (g) {
    case GateName::H: return "H";
    case GateName::S: return "S";
    case GateName::Sdg: return "Sdg";
    case GateName::X: return "X";
    case GateName::Y: return "Y";
    case GateName::Z: return "Z";
    case GateName::CNOT: return "CNOT";
    case GateName::CZ: return "CZ";
    case GateName::SWAP: return "SWAP";
    case GateName::RZ: return "RZ";
    case GateName::RZZ: return "RZZ";
  }
  return "?";
}

inline GateName parse_gate_name(const std::string& s) {
  for (GateName g : {GateName::H, GateName::S, GateName::Sdg, GateName::X, GateName::Y, GateName::Z, GateName::CNOT,
                     GateName::CZ, GateName::SWAP, GateName::RZ, GateName::RZZ})
    if (s == gate_name_str(g)) return g;
  throw UsageError("unknown gate name '" + s + "'");
}

inline int gate_arity(GateName g) {
  switch (g) {
    case GateName::CNOT: case GateName::CZ: case GateName::SWAP: case GateName::RZZ: return 2;
    default: return 1;
  }
}

inline bool is_clifford_name(GateName g) { return g != GateName::RZ && g != GateName::RZZ; }

inline CliffordElement named_clifford(GateName g) {
  using namespace clifford_gates;
  switch (g) {
    case GateName::H: return H();
    case GateName::S: return S();
    case GateName::Sdg: return Sdg();
    case GateName::X: return X();
    case GateName::Y: return Y();
    case GateName::Z: return Z();
    case GateName::CNOT: return CNOT();
    case GateName::CZ: return CZ();
    case GateName::SWAP: return SWAP();
    default: throw UsageError(std::string("gate ") + gate_name_str(g) + " is not Clifford");
  }
}

/// Dense matrix of a named gate; local qubit 0 is the least significant bit
/// (and the CNOT control).
inline Matrix named_dense(const NamedGate& g) {
  const cplx I(0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  Matrix m;
  switch (g.name) {
    case GateName::H: m.resize(2, 2); m << r, r, r, -r; break;
    case GateName::S: m.resize(2, 2); m << 1, 0, 0, I; break;
    case GateName::Sdg: m.resize(2, 2); m << 1, 0, 0, -I; break;
    case GateName::X: m.resize(2, 2); m << 0, 1, 1, 0; break;
    case GateName::Y: m.resize(2, 2); m << 0, -I, I, 0; break;
    case GateName::Z: m.resize(2, 2); m << 1, 0, 0, -1; break;
    case GateName::CNOT:
      m = Matrix::Zero(4, 4);
      m(0, 0) = m(3, 1) = m(2, 2) = m(1, 3) = 1;
      break;
    case GateName::CZ:
      m = Matrix::Identity(4, 4);
      m(3, 3) = -1;
      break;
    case GateName::SWAP:
      m = Matrix::Zero(4, 4);
      m(0, 0) = m(2, 1) = m(1, 2) = m(3, 3) = 1;
      break;
    case GateName::RZ:
      m = Matrix::Zero(2, 2);
      m(0, 0) = std::exp(-I * (g.angle / 2));
      m(1, 1) = std::exp(I * (g.angle / 2));
      break;
    case GateName::RZZ:
      // exp(-i θ/2 Z⊗Z)
      m = Matrix::Zero(4, 4);
      for (int b = 0; b < 4; ++b) {
        const int parity = (b & 1) ^ (b >> 1);
        m(b, b) = std::exp((parity ? I : -I) * (g.angle / 2));
      }
      break;
  }
  return m;
}

inline NamedGate named_inverse(const NamedGate& g) {
  switch (g.name) {
    case GateName::S: return {GateName::Sdg, 0};
    case GateName::Sdg: return {GateName::S, 0};
    case GateName::RZ: case GateName::RZZ: return {g.name, -g.angle};
    default: return g;
  }
}

struct DenseUnitary {
  Matrix matrix;
};

using GatePayload = std::variant<DenseUnitary, CliffordElement, NamedGate>;

struct Gate {
  std::vector<int> qubits;
  GatePayload payload;

  static Gate dense(std::vector<int> qubits, Matrix u) {
    Gate g{std::move(qubits), DenseUnitary{std::move(u)}};
    g.validate();
    return g;
  }
  static Gate clifford(std::vector<int> qubits, CliffordElement c) {
    Gate g{std::move(qubits), std::move(c)};
    g.validate();
    return g;
  }
  static Gate named(GateName name, std::vector<int> qubits, double angle = 0.0) {
    Gate g{std::move(qubits), NamedGate{name, angle}};
    g.validate();
    return g;
  }

  int arity() const { return static_cast<int>(qubits.size()); }

  std::string kind() const {
    if (std::holds_alternative<DenseUnitary>(payload)) return "dense";
    if (std::holds_alternative<CliffordElement>(payload)) return "clifford";
    return "named";
  }

  bool is_clifford() const {
    if (std::holds_alternative<CliffordElement>(payload)) return true;
    if (const auto* n = std::get_if<NamedGate>(&payload)) return is_clifford_name(n->name);
    return false;
  }

  CliffordElement as_clifford() const {
    if (const auto* c = std::get_if<CliffordElement>(&payload)) return *c;
    if (const auto* n = std::get_if<NamedGate>(&payload)) return named_clifford(n->name);
    throw UsageError("dense gate has no Clifford tableau");
  }

  Matrix dense_matrix() const {
    if (const auto* d = std::get_if<DenseUnitary>(&payload)) return d->matrix;
    if (const auto* c = std::get_if<CliffordElement>(&payload)) return c->dense();
    return named_dense(std::get<NamedGate>(payload));
  }

  Gate inverse() const {
    if (const auto* d = std::get_if<DenseUnitary>(&payload)) return Gate{qubits, DenseUnitary{d->matrix.adjoint()}};
    if (const auto* c = std::get_if<CliffordElement>(&payload)) return Gate{qubits, c->inverse()};
    return Gate{qubits, named_inverse(std::get<NamedGate>(payload))};
  }

  void validate() const {
    detail::require(!qubits.empty(), "gate has no qubits");
    std::set<int> s(qubits.begin(), qubits.end());
    detail::require(s.size() == qubits.size(), "gate qubit indices must be distinct");
    detail::require(*s.begin() >= 0, "gate qubit index negative");
    if (const auto* d = std::get_if<DenseUnitary>(&payload)) {
      detail::require_cap(arity() <= kMaxDenseGateQubits, "dense gate exceeds 12 qubits");
      const auto dim = static_cast<Eigen::Index>(pow2(arity()));
      detail::require(d->matrix.rows() == dim && d->matrix.cols() == dim, "dense gate dimension mismatch");
      if (!(unitarity_defect(d->matrix) <= kUnitarityTol)) throw NumericalError("dense gate payload is not unitary");
    } else if (const auto* c = std::get_if<CliffordElement>(&payload)) {
      detail::require(c->num_qubits() == arity(), "Clifford gate size mismatch");
      if (!c->is_valid()) throw NumericalError("Clifford payload is not a valid tableau");
    } else {
      detail::require(gate_arity(std::get<NamedGate>(payload).name) == arity(), "named gate arity mismatch");
    }
  }
};

using Layer = std::vector<Gate>;

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int n) : n_(n) { detail::require(n >= 1, "circuit needs at least one qubit"); }

  int n() const { return n_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t gate_count() const {
    std::size_t c = 0;
    for (const auto& l : layers_) c += l.size();
    return c;
  }

  void add_layer(Layer layer) {
    std::vector<bool> used(n_, false);
    for (const auto& g : layer) {
      detail::require(!g.qubits.empty(), "gate has no qubits");
      for (int q : g.qubits) {
        detail::require(q >= 0, "gate qubit index negative");
        detail::require(q < n_, "gate qubit index out of range");
        detail::require(!used[q], "gates within a layer must act on disjoint qubits");
        used[q] = true;
      }
    }
    layers_.push_back(std::move(layer));
  }

  /// Places the gate in the earliest layer after every layer touching its qubits.
  void append_asap(Gate g) {
    int slot = 0;
    for (int q : g.qubits) {
      detail::require(q < n_, "gate qubit index out of range");
      slot = std::max(slot, frontier(q));
    }
    if (slot == depth()) layers_.emplace_back();
    layers_[slot].push_back(std::move(g));
  }

  void append(const Circuit& other) {
    detail::require(other.n_ == n_, "append: qubit count mismatch");
    for (const auto& l : other.layers_) layers_.push_back(l);
  }

  Circuit inverse() const {
    Circuit inv(n_);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      Layer l;
      for (const auto& g : *it) l.push_back(g.inverse());
      inv.layers_.push_back(std::move(l));
    }
    return inv;
  }

  bool all_clifford() const {
    for (const auto& l : layers_)
      for (const auto& g : l)
        if (!g.is_clifford()) return false;
    return true;
  }

  int max_gate_arity() const {
    int a = 0;
    for (const auto& l : layers_)
      for (const auto& g : l) a = std::max(a, g.arity());
    return a;
  }

 private:
  int frontier(int q) const {
    for (int d = depth() - 1; d >= 0; --d)
      for (const auto& g : layers_[d])
        if (std::find(g.qubits.begin(), g.qubits.end(), q) != g.qubits.end()) return d + 1;
    return 0;
  }

  int n_ = 0;
  std::vector<Layer> layers_;
};

enum class LightconeDirection { Forward, Backward };

/// Qubits reachable from `start` through gate supports. Forward walks the
/// layers in time order (support of U O U^† for O on `start`).
inline std::set<int> lightcone(const Circuit& c, const std::set<int>& start,
                               LightconeDirection dir = LightconeDirection::Forward) {
  std::set<int> cone = start;
  auto visit = [&](const Layer& layer) {
    std::vector<int> add;
    for (const auto& g : layer) {
      bool hit = false;
      for (int q : g.qubits) hit = hit || cone.count(q) > 0;
      if (hit) add.insert(add.end(), g.qubits.begin(), g.qubits.end());
    }
    cone.insert(add.begin(), add.end());
  };
  if (dir == LightconeDirection::Forward) {
    for (const auto& l : c.layers()) visit(l);
  } else {
    for (auto it = c.layers().rbegin(); it != c.layers().rend(); ++it) visit(*it);
  }
  return cone;
}

// ------------------------------------------------------ Clifford synthesis

namespace detail {

class TableauReducer {
 public:
  explicit TableauReducer(CliffordElement c) : w_(std::move(c)) {}

  void apply(GateName g, std::vector<int> qs) {
    const CliffordElement t = named_clifford(g);
    for (int q = 0; q < w_.num_qubits(); ++q) {
      conjugate_on(w_.x_image(q), t, qs);
      conjugate_on(w_.z_image(q), t, qs);
    }
    gates_.push_back(Gate::named(g, std::move(qs)));
  }

  CliffordElement& current() { return w_; }
  const std::vector<Gate>& gates() const { return gates_; }

 private:
  CliffordElement w_;
  std::vector<Gate> gates_;
};

inline void make_x_type(TableauReducer& r, PauliString p, int from) {
  for (int q = from; q < p.n(); ++q) {
    if (!p.z(q)) continue;
    r.apply(p.x(q) ? GateName::S : GateName::H, {q});
  }
}

}  // namespace detail

/// Decomposes a Clifford into H, S, CNOT, SWAP and Pauli gates, packed
/// ASAP into layers. Column sweep: qubit i's X image is collapsed with a
/// CNOT tree and swapped into place, then its Z image is cleared by CNOTs
/// controlled on i.
inline Circuit synthesize_clifford(const CliffordElement& c) {
  const int m = c.num_qubits();
  detail::TableauReducer r(c);
  for (int i = 0; i < m; ++i) {
    detail::make_x_type(r, r.current().x_image(i), i);
    std::vector<int> support;
    for (int q = i; q < m; ++q)
      if (r.current().x_image(i).x(q)) support.push_back(q);
    if (support.empty()) throw NumericalError("synthesize_clifford: invalid tableau");
    while (support.size() > 1) {
      std::vector<int> keep;
      for (std::size_t t = 0; t + 1 < support.size(); t += 2) {
        r.apply(GateName::CNOT, {support[t], support[t + 1]});
        keep.push_back(support[t]);
      }
      if (support.size() % 2 == 1) keep.push_back(support.back());
      support = std::move(keep);
    }
    if (support[0] != i) r.apply(GateName::SWAP, {i, support[0]});

    const PauliString& b = r.current().z_image(i);
    bool clean = !b.x(i);
    for (int q = i + 1; q < m && clean; ++q) clean = !b.x(q) && !b.z(q);
    if (clean) continue;
    detail::make_x_type(r, r.current().z_image(i), i + 1);
    r.apply(GateName::H, {i});
    for (int q = i + 1; q < m; ++q)
      if (r.current().z_image(i).x(q)) r.apply(GateName::CNOT, {i, q});
    if (r.current().z_image(i).z(i)) r.apply(GateName::S, {i});
    r.apply(GateName::H, {i});
  }
  for (int i = 0; i < m; ++i) {
    if (r.current().x_image(i).sign_bit()) r.apply(GateName::Z, {i});
    if (r.current().z_image(i).sign_bit()) r.apply(GateName::X, {i});
  }
  if (r.current() != CliffordElement(m)) throw NumericalError("synthesize_clifford: reduction did not reach identity");
  // The recorded gates g_1..g_L satisfy g_L...g_1 C = I, so C = g_1^† ... g_L^†.
  Circuit out(m);
  const auto& gs = r.gates();
  for (auto it = gs.rbegin(); it != gs.rend(); ++it) out.append_asap(it->inverse());
  return out;
}

/// Tableau of an all-Clifford circuit.
inline CliffordElement circuit_clifford(const Circuit& c) {
  CliffordElement acc(c.n());
  for (const auto& layer : c.layers())
    for (const auto& g : layer) {
      const CliffordElement t = g.as_clifford();
      for (int q = 0; q < c.n(); ++q) {
        conjugate_on(acc.x_image(q), t, g.qubits);
        conjugate_on(acc.z_image(q), t, g.qubits);
      }
    }
  return acc;
}

}  // namespace lowdepth
