#pragma once

#include <cstdint>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/rng.hpp"

namespace lowdepth {

inline constexpr int kFeistelRounds = 4;

/// Keyed Feistel permutation of n-bit strings. The high ceil(n/2) bits form
/// the left half. Structure only; no security is claimed.
class FeistelPermutation {
 public:
  FeistelPermutation(int n, std::uint64_t key) : n_(n), key_(key) {
    detail::require(n >= 1 && n <= 62, "FeistelPermutation: n must lie in [1, 62]");
    left_bits_ = (n + 1) / 2;
    right_bits_ = n / 2;
  }

  int n() const { return n_; }

  std::uint64_t forward(std::uint64_t x) const {
    std::uint64_t l = x >> right_bits_, r = x & mask(right_bits_);
    for (int round = 0; round < kFeistelRounds; ++round) step(round, l, r);
    return (l << right_bits_) | r;
  }

  std::uint64_t inverse(std::uint64_t y) const {
    std::uint64_t l = y >> right_bits_, r = y & mask(right_bits_);
    for (int round = kFeistelRounds - 1; round >= 0; --round) step(round, l, r);
    return (l << right_bits_) | r;
  }

 private:
  static std::uint64_t mask(int bits) { return bits == 0 ? 0 : (~std::uint64_t{0} >> (64 - bits)); }

  // Even rounds update the left half from the right, odd rounds the reverse.
  // Each round is an involution, so the inverse replays rounds backwards.
  void step(int round, std::uint64_t& l, std::uint64_t& r) const {
    const std::uint64_t rk = detail::mix2(key_, static_cast<std::uint64_t>(round));
    if (round % 2 == 0)
      l ^= detail::mix2(rk, r) & mask(left_bits_);
    else
      r ^= detail::mix2(rk, l) & mask(right_bits_);
  }

  int n_;
  std::uint64_t key_;
  int left_bits_;
  int right_bits_;
};

/// U = P·F·C: a random Clifford C, then a keyed ±1 diagonal F, then a keyed
/// basis permutation P. Everything is derived from `key_seed`.
class PFCUnitary {
 public:
  PFCUnitary(int n, std::uint64_t key_seed)
      : n_(n), perm_(n, detail::mix2(key_seed, 1)), phase_key_(detail::mix2(key_seed, 2)) {
    detail::require(n >= 1, "PFCUnitary: n must be >= 1");
    detail::require_cap(n <= 62, "PFCUnitary: n exceeds 62");
    RngStream rng(key_seed, 3);
    clifford_ = sample_random_clifford(n, rng);
  }

  int n() const { return n_; }
  const FeistelPermutation& permutation() const { return perm_; }
  const CliffordElement& clifford() const { return clifford_; }

  /// F|x> = sign(x)|x>.
  int phase_sign(std::uint64_t x) const { return (detail::mix2(phase_key_, x) & 1U) ? -1 : 1; }

  Matrix permutation_dense() const {
    const auto d = dim();
    Matrix p = Matrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) p(static_cast<Eigen::Index>(perm_.forward(x)), x) = 1;
    return p;
  }

  Matrix phase_dense() const {
    const auto d = dim();
    Matrix f = Matrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) f(x, x) = phase_sign(static_cast<std::uint64_t>(x));
    return f;
  }

  Matrix dense() const { return permutation_dense() * phase_dense() * clifford_.dense(); }

  /// As a circuit: C as a Clifford gate, then P·F as one dense gate.
  Circuit to_circuit() const {
    Circuit c(n_);
    std::vector<int> all(n_);
    for (int q = 0; q < n_; ++q) all[q] = q;
    c.add_layer({Gate{all, clifford_}});
    c.add_layer({Gate{all, DenseUnitary{permutation_dense() * phase_dense()}}});
    return c;
  }

 private:
  Eigen::Index dim() const {
    detail::require_cap(n_ <= kMaxDenseGateQubits, "PFCUnitary: dense form limited to 12 qubits");
    return static_cast<Eigen::Index>(pow2(n_));
  }

  int n_;
  FeistelPermutation perm_;
  std::uint64_t phase_key_;
  CliffordElement clifford_;
};

inline PFCUnitary build_pfc(int n, std::uint64_t key_seed) { return PFCUnitary(n, key_seed); }

}  // namespace lowdepth
