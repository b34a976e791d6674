#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/pauli.hpp"

namespace lowdepth {

/// Clifford unitary on m qubits, up to global phase, stored as the images
/// C X_q C^† and C Z_q C^† (Hermitian Pauli strings).
class CliffordElement {
 public:
  CliffordElement() = default;
  explicit CliffordElement(int m) : m_(m) {
    for (int q = 0; q < m; ++q) {
      x_img_.push_back(PauliString::single(m, q, 'X'));
      z_img_.push_back(PauliString::single(m, q, 'Z'));
    }
  }

  CliffordElement(std::vector<PauliString> x_images, std::vector<PauliString> z_images)
      : m_(static_cast<int>(x_images.size())), x_img_(std::move(x_images)), z_img_(std::move(z_images)) {
    detail::require(x_img_.size() == z_img_.size(), "CliffordElement: image count mismatch");
    for (const auto& p : x_img_) detail::require(p.n() == m_, "CliffordElement: image size mismatch");
    for (const auto& p : z_img_) detail::require(p.n() == m_, "CliffordElement: image size mismatch");
  }

  int num_qubits() const { return m_; }
  const PauliString& x_image(int q) const { return x_img_[q]; }
  const PauliString& z_image(int q) const { return z_img_[q]; }
  PauliString& x_image(int q) { return x_img_[q]; }
  PauliString& z_image(int q) { return z_img_[q]; }

  /// Images are Hermitian and satisfy the Pauli commutation relations.
  bool is_valid() const {
    for (int a = 0; a < m_; ++a) {
      if (!x_img_[a].is_hermitian() || !z_img_[a].is_hermitian()) return false;
      for (int b = 0; b < m_; ++b) {
        if (x_img_[a].symplectic_product(x_img_[b]) != 0) return false;
        if (z_img_[a].symplectic_product(z_img_[b]) != 0) return false;
        if (x_img_[a].symplectic_product(z_img_[b]) != (a == b ? 1 : 0)) return false;
      }
    }
    return true;
  }

  /// C P C^†.
  PauliString conjugate(const PauliString& p) const {
    detail::require(p.n() == m_, "CliffordElement::conjugate: size mismatch");
    PauliString out(m_);
    out.set_phase(p.phase());
    for (int q = 0; q < m_; ++q) {
      if (p.x(q)) out *= x_img_[q];
      if (p.z(q)) out *= z_img_[q];
    }
    return out;
  }

  /// Clifford that applies `first`, then `*this`.
  CliffordElement after(const CliffordElement& first) const {
    detail::require(first.m_ == m_, "CliffordElement::after: size mismatch");
    std::vector<PauliString> xs, zs;
    for (int q = 0; q < m_; ++q) {
      xs.push_back(conjugate(first.x_img_[q]));
      zs.push_back(conjugate(first.z_img_[q]));
    }
    return CliffordElement(std::move(xs), std::move(zs));
  }

  CliffordElement inverse() const {
    std::vector<PauliString> xs, zs;
    for (int q = 0; q < m_; ++q) {
      xs.push_back(preimage(PauliString::single(m_, q, 'X')));
      zs.push_back(preimage(PauliString::single(m_, q, 'Z')));
    }
    return CliffordElement(std::move(xs), std::move(zs));
  }

  /// The Pauli P with C P C^† = target.
  PauliString preimage(const PauliString& target) const {
    PauliString p(m_);
    for (int j = 0; j < m_; ++j) {
      // Coefficient of X_j is read off by pairing with the image of Z_j.
      p.set_x(j, target.symplectic_product(z_img_[j]) != 0);
      p.set_z(j, target.symplectic_product(x_img_[j]) != 0);
    }
    const PauliString img = conjugate(p);
    p.set_phase(p.phase() + target.phase() - img.phase());
    return p;
  }

  bool operator==(const CliffordElement& o) const {
    return m_ == o.m_ && x_img_ == o.x_img_ && z_img_ == o.z_img_;
  }
  bool operator!=(const CliffordElement& o) const { return !(*this == o); }

  /// Dense unitary (m <= 12), fixed up to global phase.
  Matrix dense() const {
    detail::require_cap(m_ <= 12, "CliffordElement::dense: too many qubits");
    const auto d = static_cast<Eigen::Index>(pow2(m_));
    // C|0> is the joint +1 eigenvector of the images of Z_q.
    Vector psi(d);
    for (Eigen::Index i = 0; i < d; ++i) psi(i) = cplx(1.0 + 0.37 * i, 0.11 * i * i - 0.5);
    auto project = [&](Vector v) {
      for (int q = 0; q < m_; ++q) v = 0.5 * (v + apply_pauli(z_img_[q], v));
      return v;
    };
    psi = project(psi);
    // Fall back to basis vectors; one of them overlaps the stabilizer state.
    for (Eigen::Index y = 0; psi.norm() < 1e-6 && y < d; ++y) psi = project(Vector::Unit(d, y));
    const double nrm = psi.norm();
    if (nrm < 1e-8) throw NumericalError("CliffordElement::dense: degenerate projection");
    psi /= nrm;
    // Fix the global phase so the first nonzero amplitude of C|0> is real positive.
    Eigen::Index lead = 0;
    while (std::abs(psi(lead)) < 1e-9) ++lead;
    psi *= std::conj(psi(lead)) / std::abs(psi(lead));
    Matrix u(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
      PauliString xcol(m_);
      for (int q = 0; q < m_; ++q)
        if ((col >> q) & 1) xcol.set_x(q, true);
      u.col(col) = apply_pauli(conjugate(xcol), psi);
    }
    return u;
  }

  static Vector apply_pauli(const PauliString& p, const Vector& v) {
    Vector out = Vector::Zero(v.size());
    for (Eigen::Index b = 0; b < v.size(); ++b) {
      std::uint64_t to = 0;
      const cplx c = p.apply_to_basis(static_cast<std::uint64_t>(b), to);
      out(static_cast<Eigen::Index>(to)) += c * v(b);
    }
    return out;
  }

 private:
  int m_ = 0;
  std::vector<PauliString> x_img_;
  std::vector<PauliString> z_img_;
};

// ----------------------------------------------------------- named Cliffords

namespace clifford_gates {

inline CliffordElement from_labels(const std::vector<std::string>& xs, const std::vector<std::string>& zs) {
  std::vector<PauliString> xi, zi;
  for (const auto& s : xs) xi.push_back(PauliString::from_label(s));
  for (const auto& s : zs) zi.push_back(PauliString::from_label(s));
  return CliffordElement(std::move(xi), std::move(zi));
}

inline CliffordElement H() { return from_labels({"+Z"}, {"+X"}); }
inline CliffordElement S() { return from_labels({"+Y"}, {"+Z"}); }
inline CliffordElement Sdg() { return from_labels({"-Y"}, {"+Z"}); }
inline CliffordElement X() { return from_labels({"+X"}, {"-Z"}); }
inline CliffordElement Y() { return from_labels({"-X"}, {"-Z"}); }
inline CliffordElement Z() { return from_labels({"-X"}, {"+Z"}); }
// Local qubit 0 is the control.
inline CliffordElement CNOT() { return from_labels({"+XX", "+IX"}, {"+ZI", "+ZZ"}); }
inline CliffordElement CZ() { return from_labels({"+XZ", "+ZX"}, {"+ZI", "+IZ"}); }
inline CliffordElement SWAP() { return from_labels({"+IX", "+XI"}, {"+IZ", "+ZI"}); }

}  // namespace clifford_gates

/// Conjugates the restriction of `p` to `qubits` by the local Clifford `c`:
/// p := (C on qubits) p (C on qubits)^†.
inline void conjugate_on(PauliString& p, const CliffordElement& c, const std::vector<int>& qubits) {
  const int m = c.num_qubits();
  detail::require(static_cast<int>(qubits.size()) == m, "conjugate_on: qubit count mismatch");
  PauliString local(m);
  bool any = false;
  for (int j = 0; j < m; ++j) {
    local.set_x(j, p.x(qubits[j]));
    local.set_z(j, p.z(qubits[j]));
    any = any || p.x(qubits[j]) || p.z(qubits[j]);
  }
  if (!any) return;
  const PauliString img = c.conjugate(local);
  for (int j = 0; j < m; ++j) {
    p.set_x(qubits[j], img.x(j));
    p.set_z(qubits[j], img.z(j));
  }
  p.set_phase(p.phase() + img.phase());
}

// ----------------------------------------------------------------- sampling

namespace detail {

inline PauliString random_pauli_bits(int m, RngStream& rng) {
  PauliString p(m);
  for (int q = 0; q < m; ++q) {
    p.set_x(q, rng.bit());
    p.set_z(q, rng.bit());
  }
  return p;
}

// Symplectic projection onto the complement of span{(P_j, Q_j)}.
inline void project_out(PauliString& v, const std::vector<PauliString>& ps, const std::vector<PauliString>& qs) {
  for (std::size_t j = 0; j < ps.size(); ++j) {
    const int a = v.symplectic_product(qs[j]);
    const int b = v.symplectic_product(ps[j]);
    if (a) v *= ps[j];
    if (b) v *= qs[j];
  }
  v.set_phase(0);
}

inline void make_hermitian_with_sign(PauliString& p, bool negative) {
  p.set_phase(p.y_count() + (negative ? 2 : 0));
}

}  // namespace detail

/// Uniformly random Clifford on m qubits: a uniformly random symplectic
/// basis built pair by pair in the complement of earlier pairs, then
/// uniformly random signs.
inline CliffordElement sample_random_clifford(int m, RngStream& rng) {
  detail::require(m >= 1, "sample_random_clifford: m must be >= 1");
  detail::require_cap(m <= 64, "sample_random_clifford: m exceeds cap 64");
  std::vector<PauliString> ps, qs;
  for (int j = 0; j < m; ++j) {
    PauliString p;
    do {
      p = detail::random_pauli_bits(m, rng);
      detail::project_out(p, ps, qs);
    } while (p.is_identity_up_to_phase());
    PauliString q;
    do {
      q = detail::random_pauli_bits(m, rng);
      detail::project_out(q, ps, qs);
    } while (q.symplectic_product(p) != 1);
    ps.push_back(std::move(p));
    qs.push_back(std::move(q));
  }
  for (int j = 0; j < m; ++j) {
    detail::make_hermitian_with_sign(ps[j], rng.bit());
    detail::make_hermitian_with_sign(qs[j], rng.bit());
  }
  return CliffordElement(std::move(ps), std::move(qs));
}

}  // namespace lowdepth
