#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/pauli.hpp"

namespace lowdepth {

inline constexpr int kMaxDenseQubits = 20;
inline constexpr int kMaxStabilizerQubits = 4096;
inline constexpr double kNormDriftTol = 1e-9;

// ============================================================ dense backend

/// Amplitudes of an n-qubit state; qubit q is bit q of the basis index.
class StateVector {
 public:
  StateVector() = default;

  static StateVector zero(int n) { return basis(n, 0); }

  static StateVector basis(int n, std::uint64_t x) {
    check_size(n);
    StateVector s;
    s.n_ = n;
    s.amps_ = Vector::Zero(static_cast<Eigen::Index>(pow2(n)));
    detail::require(x < pow2(n), "StateVector::basis: index out of range");
    s.amps_(static_cast<Eigen::Index>(x)) = 1.0;
    return s;
  }

  static StateVector from_amplitudes(Vector amps) {
    int n = 0;
    while ((Eigen::Index{1} << n) < amps.size()) ++n;
    detail::require((Eigen::Index{1} << n) == amps.size() && n >= 1, "StateVector: length must be a power of two");
    check_size(n);
    detail::require(std::abs(amps.norm() - 1.0) <= 1e-10, "StateVector: amplitudes must be normalised");
    StateVector s;
    s.n_ = n;
    s.amps_ = std::move(amps);
    return s;
  }

  int n() const { return n_; }
  const Vector& amplitudes() const { return amps_; }
  Vector& amplitudes() { return amps_; }
  int renormalizations() const { return renormalizations_; }

  /// Applies a 2^m x 2^m matrix; local bit j maps to qubits[j].
  void apply_matrix(const Matrix& u, const std::vector<int>& qubits) {
    const int m = static_cast<int>(qubits.size());
    const auto d = static_cast<Eigen::Index>(pow2(m));
    detail::require(u.rows() == d && u.cols() == d, "apply_matrix: dimension mismatch");
    std::uint64_t mask = 0;
    std::vector<std::uint64_t> offset(d, 0);
    for (int j = 0; j < m; ++j) {
      detail::require(qubits[j] >= 0 && qubits[j] < n_, "apply_matrix: qubit out of range");
      mask |= std::uint64_t{1} << qubits[j];
    }
    for (Eigen::Index l = 0; l < d; ++l)
      for (int j = 0; j < m; ++j)
        if ((l >> j) & 1) offset[l] |= std::uint64_t{1} << qubits[j];
    Vector in(d), out(d);
    const std::uint64_t total = pow2(n_);
    for (std::uint64_t base = 0; base < total; ++base) {
      if (base & mask) continue;
      for (Eigen::Index l = 0; l < d; ++l) in(l) = amps_(static_cast<Eigen::Index>(base | offset[l]));
      out.noalias() = u * in;
      for (Eigen::Index l = 0; l < d; ++l) amps_(static_cast<Eigen::Index>(base | offset[l])) = out(l);
    }
  }

  void apply_gate(const Gate& g) { apply_matrix(g.dense_matrix(), g.qubits); }

  void apply_pauli(const PauliString& p) {
    detail::require(p.n() == n_, "apply_pauli: size mismatch");
    Vector out = Vector::Zero(amps_.size());
    for (Eigen::Index b = 0; b < amps_.size(); ++b) {
      std::uint64_t to = 0;
      const cplx c = p.apply_to_basis(static_cast<std::uint64_t>(b), to);
      out(static_cast<Eigen::Index>(to)) += c * amps_(b);
    }
    amps_ = std::move(out);
  }

  /// Renormalises only if the norm drifted beyond tolerance.
  void check_norm() {
    const double nrm = amps_.norm();
    if (std::abs(nrm - 1.0) > kNormDriftTol) {
      if (nrm < 1e-6) throw NumericalError("state norm collapsed");
      amps_ /= nrm;
      ++renormalizations_;
    }
  }

  RealVector probabilities() const { return amps_.cwiseAbs2(); }

  std::uint64_t born_sample(RngStream& rng) const {
    const double u = rng.uniform();
    double acc = 0;
    for (Eigen::Index i = 0; i < amps_.size(); ++i) {
      acc += std::norm(amps_(i));
      if (u < acc) return static_cast<std::uint64_t>(i);
    }
    return static_cast<std::uint64_t>(amps_.size() - 1);
  }

  /// Partial trace onto `subset`; local bit j of the result is subset[j].
  Matrix reduced_density(const std::vector<int>& subset) const {
    detail::require_cap(subset.size() <= 12, "reduced_density: subset exceeds 12 qubits");
    std::set<int> uniq(subset.begin(), subset.end());
    detail::require(uniq.size() == subset.size(), "reduced_density: repeated qubit");
    const int s = static_cast<int>(subset.size());
    std::vector<int> rest;
    for (int q = 0; q < n_; ++q)
      if (!uniq.count(q)) rest.push_back(q);
    const auto ds = static_cast<Eigen::Index>(pow2(s));
    const auto dr = static_cast<Eigen::Index>(pow2(static_cast<int>(rest.size())));
    Matrix psi(ds, dr);
    for (Eigen::Index x = 0; x < amps_.size(); ++x) {
      Eigen::Index a = 0, b = 0;
      for (int j = 0; j < s; ++j)
        if ((x >> subset[j]) & 1) a |= Eigen::Index{1} << j;
      for (std::size_t j = 0; j < rest.size(); ++j)
        if ((x >> rest[j]) & 1) b |= Eigen::Index{1} << j;
      psi(a, b) = amps_(x);
    }
    return psi * psi.adjoint();
  }

  double purity(const std::vector<int>& subset) const { return reduced_density(subset).squaredNorm(); }

 private:
  static void check_size(int n) {
    detail::require(n >= 1, "StateVector: n must be >= 1");
    detail::require_cap(n <= kMaxDenseQubits, "StateVector: n exceeds dense cap of 20");
  }

  int n_ = 0;
  Vector amps_;
  int renormalizations_ = 0;
};

inline StateVector run_dense(const Circuit& c, StateVector state) {
  detail::require(c.n() == state.n(), "run_dense: qubit count mismatch");
  for (const auto& layer : c.layers()) {
    for (const auto& g : layer) state.apply_gate(g);
    state.check_norm();
  }
  return state;
}

/// Full unitary of a circuit, column by column (n <= 12).
inline Matrix unitary_of(const Circuit& c) {
  detail::require_cap(c.n() <= 12, "unitary_of: n exceeds 12");
  const auto d = static_cast<Eigen::Index>(pow2(c.n()));
  // Cache each gate's dense matrix once.
  std::vector<std::vector<Matrix>> mats;
  for (const auto& layer : c.layers()) {
    mats.emplace_back();
    for (const auto& g : layer) mats.back().push_back(g.dense_matrix());
  }
  Matrix u(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    StateVector s = StateVector::basis(c.n(), static_cast<std::uint64_t>(col));
    for (std::size_t l = 0; l < c.layers().size(); ++l)
      for (std::size_t gi = 0; gi < c.layers()[l].size(); ++gi) s.apply_matrix(mats[l][gi], c.layers()[l][gi].qubits);
    u.col(col) = s.amplitudes();
  }
  return u;
}

// ======================================================== stabilizer backend

/// Stabilizer state as 2n rows: destabilizers 0..n-1, stabilizers n..2n-1.
class StabilizerTableau {
 public:
  StabilizerTableau() = default;

  explicit StabilizerTableau(int n) : n_(n) {
    detail::require(n >= 1, "StabilizerTableau: n must be >= 1");
    detail::require_cap(n <= kMaxStabilizerQubits, "StabilizerTableau: n exceeds 4096");
    rows_.reserve(2 * n);
    for (int q = 0; q < n; ++q) rows_.push_back(PauliString::single(n, q, 'X'));
    for (int q = 0; q < n; ++q) rows_.push_back(PauliString::single(n, q, 'Z'));
  }

  int n() const { return n_; }
  const PauliString& destabilizer(int i) const { return rows_[i]; }
  const PauliString& stabilizer(int i) const { return rows_[n_ + i]; }

  std::vector<PauliString> stabilizers() const { return {rows_.begin() + n_, rows_.end()}; }

  void apply_clifford(const CliffordElement& c, const std::vector<int>& qubits) {
    for (int q : qubits) detail::require(q >= 0 && q < n_, "apply_clifford: qubit out of range");
    for (auto& r : rows_) conjugate_on(r, c, qubits);
  }

  void apply_gate(const Gate& g) {
    if (!g.is_clifford()) throw UsageError("stabilizer backend: non-Clifford gate encountered");
    apply_clifford(g.as_clifford(), g.qubits);
  }

  /// Z-basis measurement of qubit a with a random outcome when undetermined.
  int measure(int a, RngStream& rng) {
    int outcome = 0;
    measure_impl(a, [&]() { return rng.bit() ? 1 : 0; }, -1, outcome);
    return outcome;
  }

  /// Projects qubit a onto `outcome`; returns the probability of that outcome
  /// (0, 1/2 or 1). The state is left untouched when the probability is 0.
  double measure_forced(int a, int outcome) {
    int got = 0;
    return measure_impl(a, [outcome]() { return outcome; }, outcome, got);
  }

  /// Deterministic outcome of qubit a, or -1 if random.
  int peek_deterministic(int a) const {
    for (int p = n_; p < 2 * n_; ++p)
      if (rows_[p].x(a)) return -1;
    return deterministic_outcome(a);
  }

  /// <b|ψ><ψ|b> for a bitstring b (bit q = qubit q).
  double probability_of(const std::vector<int>& b) const {
    detail::require(static_cast<int>(b.size()) == n_, "probability_of: length mismatch");
    StabilizerTableau t = *this;
    double p = 1.0;
    for (int q = 0; q < n_ && p > 0; ++q) p *= t.measure_forced(q, b[q]);
    return p;
  }

  std::vector<int> sample(RngStream& rng) const {
    StabilizerTableau t = *this;
    std::vector<int> b(n_);
    for (int q = 0; q < n_; ++q) b[q] = t.measure(q, rng);
    return b;
  }

  /// Full output distribution by branching (n <= 12).
  RealVector probabilities() const {
    detail::require_cap(n_ <= 12, "StabilizerTableau::probabilities: n exceeds 12");
    RealVector p = RealVector::Zero(static_cast<Eigen::Index>(pow2(n_)));
    branch(*this, 0, 0, 1.0, p);
    return p;
  }

  /// Number of random bits in a Z-basis measurement (GF(2) rank of the X
  /// part of the stabilizers); the support is uniform of size 2^rank.
  int x_rank() const {
    std::vector<std::vector<std::uint64_t>> m;
    for (int i = n_; i < 2 * n_; ++i) m.push_back(rows_[i].x_words());
    return gf2_rank(m);
  }

  /// Σ_x p(x)^2.
  double collision_mass() const { return std::ldexp(1.0, -x_rank()); }

  /// <ψ|P|ψ> for a Hermitian Pauli string: 0 or ±1.
  double expectation(const PauliString& p) const {
    detail::require(p.n() == n_, "expectation: size mismatch");
    for (int i = n_; i < 2 * n_; ++i)
      if (!rows_[i].commutes_with(p)) return 0.0;
    PauliString acc(n_);
    for (int i = 0; i < n_; ++i)
      if (!rows_[i].commutes_with(p)) acc *= rows_[n_ + i];
    // acc equals p up to a sign.
    const int diff = (p.phase() - acc.phase()) & 3;
    if (diff == 0) return 1.0;
    if (diff == 2) return -1.0;
    throw NumericalError("expectation: inconsistent phase");
  }

 private:
  int deterministic_outcome(int a) const {
    PauliString scratch(n_);
    for (int i = 0; i < n_; ++i)
      if (rows_[i].x(a)) scratch *= rows_[n_ + i];
    return scratch.sign_bit();
  }

  template <class Choose>
  double measure_impl(int a, Choose choose, int forced, int& outcome) {
    detail::require(a >= 0 && a < n_, "measure: qubit out of range");
    int p = -1;
    for (int i = n_; i < 2 * n_; ++i)
      if (rows_[i].x(a)) {
        p = i;
        break;
      }
    if (p < 0) {
      outcome = deterministic_outcome(a);
      return (forced < 0 || forced == outcome) ? 1.0 : 0.0;
    }
    for (int i = 0; i < 2 * n_; ++i)
      if (i != p && i != p - n_ && rows_[i].x(a)) rows_[i] *= rows_[p];
    rows_[p - n_] = rows_[p];
    outcome = choose();
    PauliString z = PauliString::single(n_, a, 'Z');
    z.set_phase(2 * outcome);
    rows_[p] = std::move(z);
    return 0.5;
  }

  static void branch(const StabilizerTableau& t, int q, std::uint64_t prefix, double prob, RealVector& out) {
    if (q == t.n_) {
      out(static_cast<Eigen::Index>(prefix)) += prob;
      return;
    }
    const int det = t.peek_deterministic(q);
    if (det >= 0) {
      StabilizerTableau c = t;
      branch(c, q + 1, prefix | (static_cast<std::uint64_t>(det) << q), prob, out);
      return;
    }
    for (int b = 0; b < 2; ++b) {
      StabilizerTableau c = t;
      c.measure_forced(q, b);
      branch(c, q + 1, prefix | (static_cast<std::uint64_t>(b) << q), prob * 0.5, out);
    }
  }

  static int gf2_rank(std::vector<std::vector<std::uint64_t>> m) {
    int rank = 0;
    if (m.empty()) return 0;
    const int words = static_cast<int>(m[0].size());
    for (int w = 0; w < words; ++w)
      for (int bit = 0; bit < 64; ++bit) {
        const std::uint64_t mask = std::uint64_t{1} << bit;
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(m.size()); ++r)
          if (m[r][w] & mask) {
            pivot = r;
            break;
          }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        for (int r = 0; r < static_cast<int>(m.size()); ++r)
          if (r != rank && (m[r][w] & mask))
            for (int k = 0; k < words; ++k) m[r][k] ^= m[rank][k];
        ++rank;
      }
    return rank;
  }

  int n_ = 0;
  std::vector<PauliString> rows_;
};

inline StabilizerTableau run_stabilizer(const Circuit& c, StabilizerTableau t) {
  detail::require(c.n() == t.n(), "run_stabilizer: qubit count mismatch");
  for (const auto& layer : c.layers())
    for (const auto& g : layer) t.apply_gate(g);
  return t;
}

inline std::vector<int> bits_of(std::uint64_t x, int n) {
  std::vector<int> b(n);
  for (int q = 0; q < n; ++q) b[q] = static_cast<int>((x >> q) & 1U);
  return b;
}

inline std::string bitstring(const std::vector<int>& b) {
  std::string s;
  for (int v : b) s += v ? '1' : '0';
  return s;
}

inline std::vector<int> parse_bitstring(const std::string& s) {
  std::vector<int> b;
  for (char c : s) {
    detail::require(c == '0' || c == '1', "bitstring must contain only 0 and 1");
    b.push_back(c - '0');
  }
  return b;
}

}  // namespace lowdepth
