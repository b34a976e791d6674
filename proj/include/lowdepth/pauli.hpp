#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"

namespace lowdepth {

/// i^phase · X^x Z^z on n qubits, bit-packed. The X^x Z^z factor means
/// ∏_q X_q^{x_q} Z_q^{z_q}; Y on a qubit is i·XZ, so a Hermitian string with
/// sign (-1)^r has phase = 2r + #Y (mod 4).
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(int n) : n_(n), x_(words(n), 0), z_(words(n), 0) {}

  static PauliString single(int n, int q, char op) {
    PauliString p(n);
    p.set(q, op);
    return p;
  }

  /// Parses "+XIZY", "-ZZ", "XX" (character j is qubit j).
  static PauliString from_label(const std::string& label) {
    std::size_t start = 0;
    int sign = 0;
    if (!label.empty() && (label[0] == '+' || label[0] == '-')) {
      sign = label[0] == '-' ? 1 : 0;
      start = 1;
    }
    PauliString p(static_cast<int>(label.size() - start));
    for (std::size_t j = start; j < label.size(); ++j) p.set(static_cast<int>(j - start), label[j]);
    p.phase_ = (p.phase_ + 2 * sign) & 3;
    return p;
  }

  int n() const { return n_; }
  int phase() const { return phase_; }
  void set_phase(int e) { phase_ = e & 3; }

  bool x(int q) const { return (x_[q >> 6] >> (q & 63)) & 1U; }
  bool z(int q) const { return (z_[q >> 6] >> (q & 63)) & 1U; }

  void set_x(int q, bool v) { assign(x_, q, v); }
  void set_z(int q, bool v) { assign(z_, q, v); }

  /// Sets qubit q to I/X/Y/Z keeping the string Hermitian with its sign.
  void set(int q, char op) {
    const bool had_y = x(q) && z(q);
    bool nx = false, nz = false;
    switch (op) {
      case 'I': case '_': break;
      case 'X': nx = true; break;
      case 'Z': nz = true; break;
      case 'Y': nx = nz = true; break;
      default: throw UsageError(std::string("invalid Pauli character '") + op + "'");
    }
    set_x(q, nx);
    set_z(q, nz);
    phase_ = (phase_ + (nx && nz ? 1 : 0) - (had_y ? 1 : 0)) & 3;
  }

  char op(int q) const {
    const bool a = x(q), b = z(q);
    return a ? (b ? 'Y' : 'X') : (b ? 'Z' : 'I');
  }

  int y_count() const {
    int c = 0;
    for (std::size_t w = 0; w < x_.size(); ++w) c += std::popcount(x_[w] & z_[w]);
    return c;
  }

  bool is_hermitian() const { return ((phase_ - y_count()) & 1) == 0; }

  /// Sign bit r of a Hermitian string, (-1)^r ⊗ σ.
  int sign_bit() const {
    detail::require(is_hermitian(), "PauliString: sign of a non-Hermitian string");
    return ((phase_ - y_count()) & 3) >> 1;
  }

  bool is_identity_up_to_phase() const {
    for (std::size_t w = 0; w < x_.size(); ++w)
      if (x_[w] | z_[w]) return false;
    return true;
  }

  bool has_x() const {
    for (auto w : x_)
      if (w) return true;
    return false;
  }

  int weight() const {
    int c = 0;
    for (std::size_t w = 0; w < x_.size(); ++w) c += std::popcount(x_[w] | z_[w]);
    return c;
  }

  std::string label() const {
    std::string s;
    s += sign_bit() ? '-' : '+';
    for (int q = 0; q < n_; ++q) s += op(q);
    return s;
  }

  /// this := this · other.
  PauliString& operator*=(const PauliString& o) {
    detail::require(n_ == o.n_, "PauliString: size mismatch");
    int cross = 0;
    for (std::size_t w = 0; w < x_.size(); ++w) {
      cross += std::popcount(z_[w] & o.x_[w]);
      x_[w] ^= o.x_[w];
      z_[w] ^= o.z_[w];
    }
    phase_ = (phase_ + o.phase_ + 2 * cross) & 3;
    return *this;
  }

  friend PauliString operator*(PauliString a, const PauliString& b) { return a *= b; }

  bool commutes_with(const PauliString& o) const { return symplectic_product(o) == 0; }

  int symplectic_product(const PauliString& o) const {
    int c = 0;
    for (std::size_t w = 0; w < x_.size(); ++w) c += std::popcount((x_[w] & o.z_[w]) ^ (z_[w] & o.x_[w]));
    return c & 1;
  }

  bool operator==(const PauliString& o) const {
    return n_ == o.n_ && phase_ == o.phase_ && x_ == o.x_ && z_ == o.z_;
  }
  bool operator!=(const PauliString& o) const { return !(*this == o); }

  /// Basis-state image: P|b> = coeff |b ^ x>. Qubit q is bit q of b.
  cplx apply_to_basis(std::uint64_t b, std::uint64_t& out) const {
    std::uint64_t xm = 0, zm = 0;
    for (int q = 0; q < n_ && q < 64; ++q) {
      if (x(q)) xm |= std::uint64_t{1} << q;
      if (z(q)) zm |= std::uint64_t{1} << q;
    }
    out = b ^ xm;
    static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    const int sgn = std::popcount(zm & b) & 1;
    return ipow[(phase_ + 2 * sgn) & 3];
  }

  Matrix dense() const {
    detail::require_cap(n_ <= 12, "PauliString::dense: too many qubits");
    const auto d = static_cast<Eigen::Index>(pow2(n_));
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
      std::uint64_t out = 0;
      const cplx c = apply_to_basis(static_cast<std::uint64_t>(b), out);
      m(static_cast<Eigen::Index>(out), b) = c;
    }
    return m;
  }

  const std::vector<std::uint64_t>& x_words() const { return x_; }
  const std::vector<std::uint64_t>& z_words() const { return z_; }

 private:
  static std::size_t words(int n) { return static_cast<std::size_t>((n + 63) / 64); }
  static void assign(std::vector<std::uint64_t>& v, int q, bool b) {
    const std::uint64_t bit = std::uint64_t{1} << (q & 63);
    if (b)
      v[q >> 6] |= bit;
    else
      v[q >> 6] &= ~bit;
  }

  int n_ = 0;
  int phase_ = 0;
  std::vector<std::uint64_t> x_;
  std::vector<std::uint64_t> z_;
};

}  // namespace lowdepth
