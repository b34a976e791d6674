#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"

namespace lowdepth {

inline constexpr int kMaxPermOrder = 8;
inline constexpr std::uint64_t kMaxGramEntries = std::uint64_t{1} << 25;
inline constexpr std::uint64_t kMaxDenseDim = std::uint64_t{1} << 12;

// ---------------------------------------------------------------- Permutation

/// One-line notation: mapping[i] is the image of i.
struct Permutation {
  std::vector<int> mapping;

  Permutation() = default;
  explicit Permutation(std::vector<int> m) : mapping(std::move(m)) {
    std::vector<bool> seen(mapping.size(), false);
    for (int v : mapping) {
      detail::require(v >= 0 && v < size() && !seen[v], "permutation: mapping is not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(int k) {
    std::vector<int> m(k);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
  }

  int size() const { return static_cast<int>(mapping.size()); }
  int operator()(int i) const { return mapping[i]; }
  bool operator==(const Permutation& o) const { return mapping == o.mapping; }
  bool operator!=(const Permutation& o) const { return !(*this == o); }
};

/// (p ∘ q)(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q) {
  detail::require(p.size() == q.size(), "compose: size mismatch");
  std::vector<int> m(p.size());
  for (int i = 0; i < p.size(); ++i) m[i] = p(q(i));
  return Permutation(std::move(m));
}

inline Permutation invert(const Permutation& p) {
  std::vector<int> m(p.size());
  for (int i = 0; i < p.size(); ++i) m[p(i)] = i;
  return Permutation(std::move(m));
}

inline int cycle_count(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  int cycles = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (int j = i; !seen[j]; j = p(j)) seen[j] = true;
  }
  return cycles;
}

/// Cayley distance to the identity, k - #cycles.
inline int cayley_length(const Permutation& p) { return p.size() - cycle_count(p); }

inline std::uint64_t factorial(int k) {
  std::uint64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

/// All of S_k in lexicographic order of one-line notation. Row/column index
/// of Gram and Weingarten matrices follows this order.
inline std::vector<Permutation> all_permutations(int k) {
  detail::require(k >= 1, "all_permutations: k must be >= 1");
  detail::require_cap(k <= kMaxPermOrder, "all_permutations: k exceeds cap " + std::to_string(kMaxPermOrder));
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 0);
  std::vector<Permutation> out;
  out.reserve(factorial(k));
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

// ------------------------------------------------------- Gram and Weingarten

struct GramMatrix {
  int k = 0;
  int dim = 0;
  RealMatrix entries;
};

struct WeingartenMatrix {
  int k = 0;
  int dim = 0;
  RealMatrix entries;
};

namespace detail {

inline void check_gram_budget(int k) {
  require(k >= 1, "k must be >= 1");
  require_cap(k <= kMaxPermOrder, "k exceeds cap " + std::to_string(kMaxPermOrder));
  const std::uint64_t f = factorial(k);
  require_cap(f * f <= kMaxGramEntries, "k!^2 entries exceed the memory budget");
}

}  // namespace detail

inline GramMatrix gram_matrix(int k, int D) {
  detail::check_gram_budget(k);
  detail::require(D >= 1, "gram_matrix: D must be positive");
  const auto perms = all_permutations(k);
  const auto n = static_cast<Eigen::Index>(perms.size());
  GramMatrix g{k, D, RealMatrix(n, n)};
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index t = 0; t < n; ++t)
      g.entries(s, t) = std::pow(static_cast<double>(D), cycle_count(compose(perms[s], invert(perms[t]))));
  return g;
}

inline WeingartenMatrix weingarten_matrix(int k, int D) {
  detail::require_regime(D >= k, "weingarten_matrix: Gram matrix is singular for D < k");
  const GramMatrix g = gram_matrix(k, D);
  Eigen::LLT<RealMatrix> llt(g.entries);
  if (llt.info() != Eigen::Success) throw NumericalError("weingarten_matrix: Gram matrix not positive definite");
  const auto n = g.entries.rows();
  WeingartenMatrix w{k, D, llt.solve(RealMatrix::Identity(n, n))};
  return w;
}

struct SumWithClosedForm {
  double enumerated = 0;
  double closed_form = 0;
};

/// Row sum of the Gram matrix by enumeration, alongside the closed form
/// (k+D-1)!/D! quoted in the literature. Enumeration is authoritative; it
/// equals the rising factorial D(D+1)...(D+k-1).
inline SumWithClosedForm sum_gram(int k, int D) {
  const GramMatrix g = gram_matrix(k, D);
  SumWithClosedForm r;
  r.enumerated = g.entries.row(0).sum();
  r.closed_form = std::exp(std::lgamma(k + D) - std::lgamma(D + 1.0));
  return r;
}

/// Row sum of |Wg| by enumeration, alongside the closed form (D-k)!/D!.
inline SumWithClosedForm sum_abs_weingarten(int k, int D) {
  const WeingartenMatrix w = weingarten_matrix(k, D);
  SumWithClosedForm r;
  r.enumerated = w.entries.row(0).cwiseAbs().sum();
  r.closed_form = std::exp(std::lgamma(D - k + 1.0) - std::lgamma(D + 1.0));
  return r;
}

// ----------------------------------------------------- k-fold tensor operators

/// Operator on (C^D)^{⊗k}. Basis index x = Σ_j x_j D^j, so copy 0 is the
/// least significant digit.
struct MomentOperatorDense {
  int k = 0;
  int dim = 0;  // local dimension D
  Matrix matrix;

  std::uint64_t total_dim() const { return static_cast<std::uint64_t>(matrix.rows()); }
};

namespace detail {

inline std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

inline std::uint64_t checked_tensor_dim(int D, int k, std::uint64_t cap) {
  require(D >= 1 && k >= 1, "tensor dimension: D and k must be positive");
  long double d = 1;
  for (int i = 0; i < k; ++i) d *= D;
  require_cap(d <= static_cast<long double>(cap), "tensor dimension D^k exceeds memory cap");
  return ipow(static_cast<std::uint64_t>(D), k);
}

}  // namespace detail

/// Basis-index map of P_p: P_p |x_0..x_{k-1}> = |y> with y_{p(i)} = x_i.
/// This is a homomorphism, P_p P_q = P_{p∘q}.
inline std::vector<std::uint64_t> permutation_index_map(const Permutation& p, int D) {
  const int k = p.size();
  const std::uint64_t total = detail::ipow(static_cast<std::uint64_t>(D), k);
  std::vector<std::uint64_t> pw(k);
  for (int i = 0; i < k; ++i) pw[i] = detail::ipow(static_cast<std::uint64_t>(D), i);
  std::vector<std::uint64_t> map(total);
  std::vector<int> digits(k, 0);
  for (std::uint64_t x = 0; x < total; ++x) {
    std::uint64_t y = 0;
    for (int i = 0; i < k; ++i) y += static_cast<std::uint64_t>(digits[i]) * pw[p(i)];
    map[x] = y;
    for (int i = 0; i < k; ++i) {
      if (++digits[i] < D) break;
      digits[i] = 0;
    }
  }
  return map;
}

inline MomentOperatorDense permutation_operator(const Permutation& p, int D) {
  const std::uint64_t total = detail::checked_tensor_dim(D, p.size(), kMaxDenseDim);
  const auto map = permutation_index_map(p, D);
  MomentOperatorDense op{p.size(), D, Matrix::Zero(total, total)};
  for (std::uint64_t x = 0; x < total; ++x) op.matrix(map[x], x) = 1.0;
  return op;
}

namespace detail {

inline int infer_k(std::uint64_t total, int D) {
  int k = 0;
  std::uint64_t t = 1;
  while (t < total) {
    t *= static_cast<std::uint64_t>(D);
    ++k;
  }
  require(t == total && k >= 1, "operator dimension is not a power of the local dimension");
  return k;
}

// Tr(A P_p^{-1}) = Σ_x A[x, map_{p^{-1}}(x)].
inline cplx trace_against_inverse(const Matrix& a, const std::vector<std::uint64_t>& inv_map) {
  cplx s = 0;
  for (std::size_t x = 0; x < inv_map.size(); ++x) s += a(static_cast<Eigen::Index>(x), inv_map[x]);
  return s;
}

inline Matrix permutation_sum(const std::vector<std::vector<std::uint64_t>>& maps, const std::vector<cplx>& coeff) {
  const auto total = static_cast<Eigen::Index>(maps.front().size());
  Matrix out = Matrix::Zero(total, total);
  for (std::size_t t = 0; t < maps.size(); ++t) {
    if (coeff[t] == cplx(0)) continue;
    for (Eigen::Index x = 0; x < total; ++x) out(maps[t][x], x) += coeff[t];
  }
  return out;
}

inline std::vector<cplx> twirl_traces(const MomentOperatorDense& a, const std::vector<Permutation>& perms,
                                      std::vector<std::vector<std::uint64_t>>& maps) {
  maps.clear();
  std::vector<cplx> tr(perms.size());
  for (std::size_t s = 0; s < perms.size(); ++s) {
    maps.push_back(permutation_index_map(perms[s], a.dim));
    tr[s] = trace_against_inverse(a.matrix, permutation_index_map(invert(perms[s]), a.dim));
  }
  return tr;
}

}  // namespace detail

/// Wraps a D^k × D^k matrix, checking dimensions.
inline MomentOperatorDense make_moment_operator(Matrix m, int D) {
  detail::require(m.rows() == m.cols(), "moment operator must be square");
  const int k = detail::infer_k(static_cast<std::uint64_t>(m.rows()), D);
  detail::require_cap(static_cast<std::uint64_t>(m.rows()) <= kMaxDenseDim, "moment operator exceeds memory cap");
  return MomentOperatorDense{k, D, std::move(m)};
}

/// Φ_H(A) = Σ_{σ,τ} Tr(Aσ^{-1}) Wg_{σ,τ} τ.
inline MomentOperatorDense haar_twirl_exact(const MomentOperatorDense& a) {
  detail::require_regime(a.k <= a.dim, "haar_twirl_exact: requires k <= D");
  const auto perms = all_permutations(a.k);
  std::vector<std::vector<std::uint64_t>> maps;
  const auto tr = detail::twirl_traces(a, perms, maps);
  const WeingartenMatrix wg = weingarten_matrix(a.k, a.dim);
  std::vector<cplx> coeff(perms.size(), 0.0);
  for (std::size_t t = 0; t < perms.size(); ++t)
    for (std::size_t s = 0; s < perms.size(); ++s) coeff[t] += tr[s] * wg.entries(s, t);
  return MomentOperatorDense{a.k, a.dim, detail::permutation_sum(maps, coeff)};
}

/// Φ_a(A) = D^{-k} Σ_σ Tr(Aσ^{-1}) σ.
inline MomentOperatorDense haar_twirl_approx(const MomentOperatorDense& a) {
  const auto perms = all_permutations(a.k);
  std::vector<std::vector<std::uint64_t>> maps;
  auto coeff = detail::twirl_traces(a, perms, maps);
  const double scale = 1.0 / static_cast<double>(a.total_dim());
  for (auto& c : coeff) c *= scale;
  return MomentOperatorDense{a.k, a.dim, detail::permutation_sum(maps, coeff)};
}

// -------------------------------------------------------------- Choi objects

enum class TwirlKind { Exact, Approx };

/// Σ_{σ,τ} c(σ,τ) τ ⊗ σ on (C^D)^{⊗k} ⊗ (C^D)^{⊗k}, stored by its
/// coefficients. Index convention: out + D^k·ref, with τ acting on the
/// output register and σ on the reference. Applies in O(#terms · D^{2k})
/// without forming the matrix.
struct PermutationPairOperator {
  int k = 0;
  int dim = 0;
  RealMatrix coeff;  // rows σ, columns τ, lexicographic order

  std::uint64_t half_dim() const { return detail::ipow(static_cast<std::uint64_t>(dim), k); }
  std::uint64_t total_dim() const { return half_dim() * half_dim(); }

  using IndexMaps = std::vector<std::vector<std::uint64_t>>;

  IndexMaps index_maps() const {
    IndexMaps maps;
    for (const auto& p : all_permutations(k)) maps.push_back(permutation_index_map(p, dim));
    return maps;
  }

  void apply(const IndexMaps& maps, const Vector& in, Vector& out) const {
    const std::uint64_t h = half_dim();
    out = Vector::Zero(in.size());
    for (std::size_t s = 0; s < maps.size(); ++s)
      for (std::size_t t = 0; t < maps.size(); ++t) {
        const double c = coeff(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
        if (c == 0.0) continue;
        for (std::uint64_t r = 0; r < h; ++r) {
          const std::uint64_t rr = maps[s][r] * h;
          for (std::uint64_t o = 0; o < h; ++o) out(maps[t][o] + rr) += c * in(o + r * h);
        }
      }
  }

  void apply(const Vector& in, Vector& out) const { apply(index_maps(), in, out); }

  Matrix dense() const {
    detail::require_cap(total_dim() <= kMaxDenseDim, "PermutationPairOperator::dense exceeds memory cap");
    const auto maps = index_maps();
    const auto n = static_cast<Eigen::Index>(total_dim());
    Matrix m(n, n);
    Vector e = Vector::Zero(n), col;
    for (Eigen::Index j = 0; j < n; ++j) {
      e(j) = 1.0;
      apply(maps, e, col);
      m.col(j) = col;
      e(j) = 0.0;
    }
    return m;
  }

  double spectral_norm() const {
    const auto maps = index_maps();
    return lanczos_spectral_norm([this, &maps](const Vector& in, Vector& out) { apply(maps, in, out); },
                                 static_cast<Eigen::Index>(total_dim()));
  }

  PermutationPairOperator operator-(const PermutationPairOperator& o) const {
    detail::require(k == o.k && dim == o.dim, "PermutationPairOperator: shape mismatch");
    return PermutationPairOperator{k, dim, coeff - o.coeff};
  }
};

/// Choi state of a permutation-twirl channel on n qubits, in structured form.
/// Exact: (1/D^k) Σ Wg_{σ,τ} τ⊗σ. Approx: (1/D^{2k}) Σ σ⊗σ.
inline PermutationPairOperator choi_pair_operator(TwirlKind kind, int k, int n) {
  detail::require(n >= 1 && n <= 30, "choi_pair_operator: n out of range");
  const int D = 1 << n;
  detail::check_gram_budget(k);
  const double dk = std::pow(static_cast<double>(D), k);
  PermutationPairOperator op{k, D, {}};
  const auto f = static_cast<Eigen::Index>(factorial(k));
  if (kind == TwirlKind::Approx) {
    op.coeff = RealMatrix::Identity(f, f) / (dk * dk);
  } else {
    op.coeff = weingarten_matrix(k, D).entries / dk;
  }
  return op;
}

/// Dense Choi state [Φ⊗1](P_EPR) of a permutation twirl. Guarded by 2nk <= 12.
inline MomentOperatorDense choi_of_twirl(TwirlKind kind, int k, int n) {
  detail::require(k >= 1 && n >= 1, "choi_of_twirl: k and n must be positive");
  detail::require_cap(2 * n * k <= 12, "choi_of_twirl: 2nk exceeds the dense guard of 12");
  const auto op = choi_pair_operator(kind, k, n);
  return MomentOperatorDense{2 * k, 1 << n, op.dense()};
}

using Channel = std::function<Matrix(const Matrix&)>;

/// Dense Choi state (1/D^k) Σ_{ij} Φ(|i><j|) ⊗ |i><j| of an arbitrary channel
/// on D^k-dimensional operators, same index convention as above.
inline MomentOperatorDense choi_of_channel(const Channel& phi, int k, int n) {
  detail::require(k >= 1 && n >= 1, "choi_of_channel: k and n must be positive");
  detail::require_cap(2 * n * k <= 12, "choi_of_channel: 2nk exceeds the dense guard of 12");
  const auto h = static_cast<Eigen::Index>(pow2(n * k));
  Matrix choi = Matrix::Zero(h * h, h * h);
  Matrix e = Matrix::Zero(h, h);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < h; ++j) {
      e(i, j) = 1.0;
      choi.block(i * h, j * h, h, h) = phi(e) / static_cast<double>(h);
      e(i, j) = 0.0;
    }
  return MomentOperatorDense{2 * k, 1 << n, std::move(choi)};
}

namespace detail {

inline double epr_bound_from_norm(double norm, int k, int n) {
  const double D = std::ldexp(1.0, n);
  const double k2 = static_cast<double>(k) * k;
  require_regime(k2 <= D, "relative_error_from_epr: requires k^2 <= 2^n");
  const double prefactor = std::exp(2.0 * k * n * std::log(2.0) - std::lgamma(k + 1.0));
  return prefactor * (1.0 + k2 / D) * norm + k2 / D;
}

}  // namespace detail

/// Relative-error bound (D^{2k}/k!)(1 + k²/D)·‖ρ_E − ρ_a‖_∞ + k²/D.
inline double relative_error_from_epr(const MomentOperatorDense& choi_e, int k, int n) {
  const auto choi_a = choi_of_twirl(TwirlKind::Approx, k, n);
  detail::require(choi_e.matrix.rows() == choi_a.matrix.rows() && choi_e.matrix.cols() == choi_a.matrix.cols(),
                  "relative_error_from_epr: Choi dimensions do not match");
  const double D = std::ldexp(1.0, n);
  detail::require_regime(static_cast<double>(k) * k <= D, "relative_error_from_epr: requires k^2 <= 2^n");
  return detail::epr_bound_from_norm(spectral_norm(choi_e.matrix - choi_a.matrix), k, n);
}

/// Structured variant for Choi states that are permutation-pair sums; works
/// beyond the dense guard via Lanczos.
inline double relative_error_from_epr(const PermutationPairOperator& choi_e, int n) {
  const auto choi_a = choi_pair_operator(TwirlKind::Approx, choi_e.k, n);
  detail::require(choi_e.dim == choi_a.dim, "relative_error_from_epr: Choi dimensions do not match");
  const double D = std::ldexp(1.0, n);
  detail::require_regime(static_cast<double>(choi_e.k) * choi_e.k <= D,
                         "relative_error_from_epr: requires k^2 <= 2^n");
  return detail::epr_bound_from_norm((choi_e - choi_a).spectral_norm(), choi_e.k, n);
}

// ------------------------------------------------------------- Error budgets

/// ε from gluing an ε1-design on AB with an ε2-design on BC:
/// 1+ε = (1+ε1)(1+ε2)(1−k²/2D_AB)^{-1}(1−k²/2D_BC)^{-1} e^{k²/2D_B}(1+k²/D_ABC).
inline double gluing_error_bound(double eps1, double eps2, int k, int nA, int nB, int nC) {
  detail::require(eps1 >= 0 && eps2 >= 0, "gluing_error_bound: epsilons must be nonnegative");
  detail::require(k >= 0 && nA >= 0 && nB >= 0 && nC >= 0, "gluing_error_bound: negative size");
  const double k2 = static_cast<double>(k) * k;
  const double dB = std::ldexp(1.0, nB);
  detail::require_regime(k2 <= dB / 2.0, "gluing_error_bound: requires k^2 <= D_B/2");
  const double dAB = std::ldexp(1.0, nA + nB);
  const double dBC = std::ldexp(1.0, nB + nC);
  const double dABC = std::ldexp(1.0, nA + nB + nC);
  const double one_plus = (1 + eps1) * (1 + eps2) / (1 - k2 / (2 * dAB)) / (1 - k2 / (2 * dBC)) *
                          std::exp(k2 / (2 * dB)) * (1 + k2 / dABC);
  return one_plus - 1;
}

struct DepthBudget {
  int xi_min = 0;
  int m = 0;             // number of patches, floor(n / xi)
  double q = 0;          // 2^xi
  double f = 0;          // per-gluing overhead f(k, q)
  double exact = 0;      // (1+ε/n)^{m-1}(1+f)^{m-2} − 1
  double linearized = 0; // ((m−1)ε/n + (m−2)f)/ln 2
};

/// Smallest patch size ξ ≥ log2(nk²/ε) and the accumulated brickwork error.
inline DepthBudget theorem1_depth_budget(int n, int k, double eps) {
  detail::require(n >= 2 && k >= 1, "theorem1_depth_budget: need n >= 2, k >= 1");
  detail::require(eps > 0 && eps <= 1, "theorem1_depth_budget: eps must lie in (0, 1]");
  DepthBudget b;
  const double target = static_cast<double>(n) * k * k / eps;
  b.xi_min = std::max(1, static_cast<int>(std::ceil(std::log2(target) - 1e-12)));
  b.m = n / b.xi_min;
  b.q = std::ldexp(1.0, b.xi_min);
  const double k2 = static_cast<double>(k) * k;
  const double q = b.q;
  const double h = k2 / (2 * q * q);
  b.f = 2 * (k2 / q + k2 / (q * q) + k2 * k2 / (q * q * q) + h / (1 - h)) * (1 + k2 / (q * q));
  const int local = std::max(0, b.m - 1);
  const int glue = std::max(0, b.m - 2);
  b.exact = std::pow(1 + eps / n, local) * std::pow(1 + b.f, glue) - 1;
  b.linearized = (local * eps / n + glue * b.f) / std::log(2.0);
  return b;
}

}  // namespace lowdepth
