#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/parallel.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/core/stats.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/pauli.hpp"
#include "lowdepth/serialize.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {

inline constexpr int kMaxShadowDenseQubits = 14;

struct Snapshot {
  Circuit u;
  std::vector<int> b;
};

/// Brickwork patch size for log-depth shadows: ceil(log2 n) + 2, clamped to
/// n/2 so that at least two patches exist.
inline int log_depth_xi(int n) {
  detail::require(n >= 2, "log_depth_xi: n must be >= 2");
  int lg = 0;
  while ((1 << lg) < n) ++lg;
  return std::min(lg + 2, n / 2);
}

inline BrickworkSpec log_depth_shadow_spec(int n) { return BrickworkSpec{n, log_depth_xi(n), LocalKind::clifford()}; }

/// Samples N snapshots (U, b) with b ~ |⟨b|U|ψ⟩|², ψ = prep|0⟩. Snapshot i
/// uses stream (seed, i). Clifford prep and ensemble use the stabilizer
/// backend; otherwise the state is simulated densely.
inline std::vector<Snapshot> collect_shadows(const Circuit& prep, const Ensemble& ensemble, std::size_t N,
                                             std::uint64_t seed, const ExecPolicy& policy = {}) {
  const int n = prep.n();
  detail::require(ensemble.n() == n, "collect_shadows: ensemble and state sizes differ");
  const bool stab = prep.all_clifford() && ensemble.is_clifford();
  if (!stab) detail::require_cap(n <= kMaxShadowDenseQubits, "collect_shadows: dense backend limited to 14 qubits");
  std::optional<StabilizerTableau> tab;
  std::optional<StateVector> psi;
  if (stab) tab = run_stabilizer(prep, StabilizerTableau(n));
  else psi = run_dense(prep, StateVector::zero(n));
  return parallel_map<Snapshot>(N, policy, [&](std::size_t i) {
    RngStream rng(seed, i);
    Circuit u = ensemble.sample(rng);
    std::vector<int> b;
    if (stab) {
      b = run_stabilizer(u, *tab).sample(rng);
    } else {
      b = bits_of(run_dense(u, *psi).born_sample(rng), n);
    }
    return Snapshot{std::move(u), std::move(b)};
  });
}

// ------------------------------------------------------------ observables

struct DenseObservable {
  Matrix matrix;
};
/// |φ⟩⟨φ| with |φ⟩ = prep|0⟩ for a Clifford circuit prep.
struct StabilizerProjector {
  Circuit prep;
};
struct PauliObservable {
  PauliString pauli;  // Hermitian
};

using ShadowObservable = std::variant<DenseObservable, StabilizerProjector, PauliObservable>;

inline int observable_qubits(const ShadowObservable& o) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DenseObservable>) {
          int n = 0;
          while ((Eigen::Index{1} << n) < v.matrix.rows()) ++n;
          return n;
        } else if constexpr (std::is_same_v<T, StabilizerProjector>) {
          return v.prep.n();
        } else {
          return v.pauli.n();
        }
      },
      o);
}

inline void validate_observable(const ShadowObservable& o) {
  if (const auto* d = std::get_if<DenseObservable>(&o)) {
    detail::require(d->matrix.rows() == d->matrix.cols(), "observable must be square");
    detail::require((Eigen::Index{1} << observable_qubits(o)) == d->matrix.rows(), "observable dimension must be 2^n");
    detail::require((d->matrix - d->matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-10, "observable must be Hermitian");
  } else if (const auto* s = std::get_if<StabilizerProjector>(&o)) {
    detail::require(s->prep.all_clifford(), "stabilizer projector needs a Clifford preparation circuit");
  } else {
    detail::require(std::get<PauliObservable>(o).pauli.is_hermitian(), "Pauli observable must be Hermitian");
  }
}

inline double observable_trace(const ShadowObservable& o) {
  if (const auto* d = std::get_if<DenseObservable>(&o)) return d->matrix.trace().real();
  if (std::holds_alternative<StabilizerProjector>(o)) return 1.0;
  const auto& p = std::get<PauliObservable>(o).pauli;
  if (!p.is_identity_up_to_phase()) return 0.0;
  return (p.sign_bit() ? -1.0 : 1.0) * std::ldexp(1.0, p.n());
}

/// tr(O_0²) with O_0 the traceless part of O.
inline double traceless_norm_sq(const ShadowObservable& o) {
  const int n = observable_qubits(o);
  const double dim = std::ldexp(1.0, n), tr = observable_trace(o);
  double tr2;
  if (const auto* d = std::get_if<DenseObservable>(&o)) tr2 = d->matrix.squaredNorm();
  else if (std::holds_alternative<StabilizerProjector>(o)) tr2 = 1.0;
  else tr2 = dim;
  return tr2 - tr * tr / dim;
}

/// Dense matrix of the observable (n <= 12).
inline Matrix observable_dense(const ShadowObservable& o) {
  if (const auto* d = std::get_if<DenseObservable>(&o)) return d->matrix;
  if (const auto* s = std::get_if<StabilizerProjector>(&o)) {
    detail::require_cap(s->prep.n() <= 12, "observable_dense: n exceeds 12");
    const Vector phi = run_dense(s->prep, StateVector::zero(s->prep.n())).amplitudes();
    return phi * phi.adjoint();
  }
  return std::get<PauliObservable>(o).pauli.dense();
}

namespace detail {

// ⟨b|P'|b⟩ for P' = C P C^†: zero unless P' is Z-type, otherwise its sign
// times (-1)^{z·b}.
inline double pauli_rotated_value(const PauliString& rotated, const std::vector<int>& b) {
  if (rotated.has_x()) return 0.0;
  int parity = rotated.sign_bit();
  for (int q = 0; q < rotated.n(); ++q)
    if (rotated.z(q) && b[q]) parity ^= 1;
  return parity ? -1.0 : 1.0;
}

}  // namespace detail

/// ⟨b|U O U^†|b⟩.
inline double rotated_expectation(const Circuit& u, const std::vector<int>& b, const ShadowObservable& o) {
  const int n = u.n();
  detail::require(observable_qubits(o) == n, "observable and circuit sizes differ");
  detail::require(static_cast<int>(b.size()) == n, "outcome length differs from qubit count");
  if (const auto* p = std::get_if<PauliObservable>(&o)) {
    if (u.all_clifford()) return detail::pauli_rotated_value(circuit_clifford(u).conjugate(p->pauli), b);
  }
  if (const auto* s = std::get_if<StabilizerProjector>(&o)) {
    if (u.all_clifford()) return run_stabilizer(u, run_stabilizer(s->prep, StabilizerTableau(n))).probability_of(b);
  }
  detail::require_cap(n <= kMaxShadowDenseQubits, "rotated_expectation: dense evaluation limited to 14 qubits");
  std::uint64_t x = 0;
  for (int q = 0; q < n; ++q) x |= static_cast<std::uint64_t>(b[q]) << q;
  const Vector w = run_dense(u.inverse(), StateVector::basis(n, x)).amplitudes();
  if (const auto* s = std::get_if<StabilizerProjector>(&o)) {
    const Vector phi = run_dense(s->prep, StateVector::zero(n)).amplitudes();
    return std::norm(phi.dot(w));
  }
  if (const auto* p = std::get_if<PauliObservable>(&o)) {
    StateVector pw = StateVector::from_amplitudes(w);
    pw.apply_pauli(p->pauli);
    return w.dot(pw.amplitudes()).real();
  }
  return w.dot(std::get<DenseObservable>(o).matrix * w).real();
}

/// (2^n + 1)⟨b|U O U^†|b⟩ − tr(O).
inline double snapshot_value(const Snapshot& s, const ShadowObservable& o) {
  const double dim = std::ldexp(1.0, s.u.n());
  return (dim + 1.0) * rotated_expectation(s.u, s.b, o) - observable_trace(o);
}

inline std::vector<double> snapshot_values(const std::vector<Snapshot>& snaps, const ShadowObservable& o,
                                           const ExecPolicy& policy = {}) {
  validate_observable(o);
  return parallel_map<double>(snaps.size(), policy, [&](std::size_t i) { return snapshot_value(snaps[i], o); });
}

// ------------------------------------------------------------- estimation

enum class ShadowMethod { Mean, MedianOfMeans };

/// K = 2 ceil(ln(2/δ)).
inline int default_batches(double delta = 0.05) { return 2 * static_cast<int>(std::ceil(std::log(2.0 / delta))); }

struct ShadowEstimate {
  double value = 0.0;
  std::vector<double> batch_means;
  std::size_t n_snapshots = 0;
  ShadowMethod method = ShadowMethod::Mean;
  int batches = 1;
  double mean = 0.0;
  double std_error = 0.0;        // of the plain mean
  double sample_variance = 0.0;  // of single-snapshot values
};

inline double median_of(std::vector<double> v) {
  detail::require(!v.empty(), "median of empty sequence");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Aggregates snapshot values. Median-of-means splits the first
/// K*floor(N/K) values into K consecutive equal batches.
inline ShadowEstimate estimate_from_values(const std::vector<double>& values, ShadowMethod method, int K = default_batches()) {
  detail::require(!values.empty(), "estimate: no snapshots");
  ShadowEstimate e;
  e.n_snapshots = values.size();
  e.method = method;
  MeanAccumulator acc;
  for (double v : values) acc.add(v);
  e.mean = acc.mean();
  e.std_error = acc.std_error();
  e.sample_variance = acc.variance();
  if (method == ShadowMethod::Mean) {
    e.batches = 1;
    e.batch_means = {e.mean};
    e.value = e.mean;
    return e;
  }
  detail::require(K >= 1 && static_cast<std::size_t>(K) <= values.size(), "median-of-means: need at least K snapshots");
  e.batches = K;
  const std::size_t per = values.size() / static_cast<std::size_t>(K);
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += values[k * per + i];
    e.batch_means.push_back(s / static_cast<double>(per));
  }
  e.value = median_of(e.batch_means);
  return e;
}

inline ShadowEstimate estimate_observable(const std::vector<Snapshot>& snaps, const ShadowObservable& o,
                                          ShadowMethod method = ShadowMethod::MedianOfMeans, int K = default_batches(),
                                          const ExecPolicy& policy = {}) {
  return estimate_from_values(snapshot_values(snaps, o, policy), method, K);
}

/// ⟨ψ|O|ψ⟩ with ψ = prep|0⟩, computed densely.
inline double exact_expectation(const Circuit& prep, const ShadowObservable& o) {
  detail::require_cap(prep.n() <= 12, "exact_expectation: n exceeds 12");
  const Vector psi = run_dense(prep, StateVector::zero(prep.n())).amplitudes();
  if (const auto* s = std::get_if<StabilizerProjector>(&o))
    return std::norm(run_dense(s->prep, StateVector::zero(prep.n())).amplitudes().dot(psi));
  return psi.dot(observable_dense(o) * psi).real();
}

struct BiasReport {
  double estimate = 0.0;
  double truth = 0.0;
  double bias_estimate = 0.0;   // estimate − truth
  double ci_halfwidth = 0.0;    // 3 standard errors
  bool ci_contains_zero = false;
  double paper_bound = 0.0;     // 2 ε tr(O)
  std::size_t n_snapshots = 0;
};

/// Mean shadow estimate against the exact value, with the bound 2ε tr(O)
/// for a caller-supplied ε.
inline BiasReport bias_probe(const Ensemble& ensemble, const Circuit& prep, const ShadowObservable& o, std::size_t N,
                             std::uint64_t seed, double eps, const ExecPolicy& policy = {}) {
  const auto snaps = collect_shadows(prep, ensemble, N, seed, policy);
  const auto est = estimate_observable(snaps, o, ShadowMethod::Mean, 1, policy);
  BiasReport r;
  r.estimate = est.mean;
  r.truth = exact_expectation(prep, o);
  r.bias_estimate = r.estimate - r.truth;
  r.ci_halfwidth = 3.0 * est.std_error;
  r.ci_contains_zero = std::abs(r.bias_estimate) <= r.ci_halfwidth;
  r.paper_bound = 2.0 * eps * std::abs(observable_trace(o));
  r.n_snapshots = N;
  return r;
}

/// ⟨b|U O U^†|b⟩ for every b (dense, n <= 12).
inline RealVector rotated_diagonal(const Circuit& u, const ShadowObservable& o) {
  const int n = u.n();
  detail::require_cap(n <= 12, "rotated_diagonal: n exceeds 12");
  const auto dim = static_cast<Eigen::Index>(pow2(n));
  RealVector diag = RealVector::Zero(dim);
  if (const auto* p = std::get_if<PauliObservable>(&o); p && u.all_clifford()) {
    const PauliString rotated = circuit_clifford(u).conjugate(p->pauli);
    for (Eigen::Index x = 0; x < dim; ++x) diag(x) = detail::pauli_rotated_value(rotated, bits_of(x, n));
    return diag;
  }
  if (const auto* s = std::get_if<StabilizerProjector>(&o)) {
    Circuit both = s->prep;
    both.append(u);
    return run_dense(both, StateVector::zero(n)).probabilities();
  }
  const Matrix m = observable_dense(o);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("rotated_diagonal: eigendecomposition failed");
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double lambda = es.eigenvalues()(j);
    if (std::abs(lambda) <= 1e-14 * scale) continue;
    const Vector col = es.eigenvectors().col(j);
    diag += lambda * run_dense(u, StateVector::from_amplitudes(col)).probabilities();
  }
  return diag;
}

struct ShadowNorm {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// E_U Σ_b ⟨b|UσU^†|b⟩ ((2^n+1)⟨b|UOU^†|b⟩ − tr O)², the second moment of the
/// single-snapshot estimator at state σ = sigma_prep|0⟩, summed exactly over
/// b for each sampled U.
inline ShadowNorm shadow_norm_empirical(const Ensemble& ensemble, const ShadowObservable& o, const Circuit& sigma_prep,
                                        std::size_t samples, std::uint64_t seed, const ExecPolicy& policy = {}) {
  const int n = sigma_prep.n();
  detail::require_cap(n <= 12, "shadow_norm_empirical: n exceeds 12");
  detail::require(samples >= 2, "shadow_norm_empirical: need at least two samples");
  validate_observable(o);
  const double dim = std::ldexp(1.0, n), tr = observable_trace(o);
  const StateVector sigma = run_dense(sigma_prep, StateVector::zero(n));
  auto chunk = [&](std::size_t b, std::size_t e) {
    MeanAccumulator acc;
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const Circuit u = ensemble.sample(rng);
      const RealVector p = run_dense(u, sigma).probabilities();
      const RealVector v = ((dim + 1.0) * rotated_diagonal(u, o)).array() - tr;
      acc.add(p.dot(v.cwiseAbs2()));
    }
    return acc;
  };
  const auto acc = chunked_reduce<MeanAccumulator>(samples, 16, policy, chunk, MeanAccumulator::combine);
  return {acc.mean(), acc.std_error(), samples};
}

// ----------------------------------------------------------- persistence

inline json snapshot_to_json(const Snapshot& s) { return {{"circuit", circuit_to_json(s.u)}, {"b", bitstring(s.b)}}; }

inline Snapshot snapshot_from_json(const json& j) {
  try {
    Snapshot s{circuit_from_json(j.at("circuit")), parse_bitstring(j.at("b").get<std::string>())};
    detail::require(static_cast<int>(s.b.size()) == s.u.n(), "snapshot outcome length differs from qubit count");
    return s;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed snapshot: ") + e.what());
  }
}

/// One JSON object per line.
inline std::string snapshots_to_ndjson(const std::vector<Snapshot>& snaps) {
  std::string out;
  for (const auto& s : snaps) out += snapshot_to_json(s).dump() + "\n";
  return out;
}

inline std::vector<Snapshot> snapshots_from_ndjson(const std::string& text) {
  std::vector<Snapshot> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(snapshot_from_json(parse_json_text(line, "snapshot line")));
    pos = end + 1;
  }
  return out;
}

}  // namespace lowdepth
