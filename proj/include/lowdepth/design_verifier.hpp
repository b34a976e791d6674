#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/parallel.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/core/stats.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/perm_calculus.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {

inline constexpr std::size_t kSampleChunk = 64;

/// ½‖a − b‖₁.
inline double trace_distance(const Matrix& a, const Matrix& b) { return 0.5 * trace_norm(a - b); }

/// U^{⊗k} v for v in (C^D)^{⊗k}; copy j is base-D digit j of the index.
inline Vector apply_tensor_power(const Matrix& u, int k, const Vector& v) {
  const Eigen::Index d = u.rows();
  Vector cur = v, next(v.size());
  Eigen::Index stride = 1;
  Vector buf(d);
  for (int j = 0; j < k; ++j) {
    for (Eigen::Index base = 0; base < cur.size(); ++base) {
      if ((base / stride) % d != 0) continue;
      for (Eigen::Index a = 0; a < d; ++a) buf(a) = cur(base + a * stride);
      const Vector out = u * buf;
      for (Eigen::Index a = 0; a < d; ++a) next(base + a * stride) = out(a);
    }
    std::swap(cur, next);
    stride *= d;
  }
  return cur;
}

// ---------------------------------------------------------- moment channel

struct MomentEstimate {
  int k = 0;
  int n = 0;
  MomentOperatorDense mean_channel_output;
  std::size_t sample_count = 0;
  double standard_error = 0.0;  // Frobenius-norm standard error of the mean
};

/// Monte Carlo estimate of E[U^{⊗k} A U^{†⊗k}] with sample i drawn from
/// stream (seed, i).
inline MomentEstimate moment_channel_mc(const Ensemble& ensemble, int k, const Matrix& probe, std::size_t samples,
                                        std::uint64_t seed, const ExecPolicy& policy = {}) {
  const int n = ensemble.n();
  detail::require(k >= 1, "moment_channel_mc: k must be >= 1");
  detail::require_cap(n * k <= 12, "moment_channel_mc: n*k exceeds 12");
  detail::require(samples >= 2, "moment_channel_mc: need at least two samples");
  const auto total = static_cast<Eigen::Index>(pow2(n * k));
  detail::require(probe.rows() == total && probe.cols() == total, "moment_channel_mc: probe has wrong dimension");
  detail::require((probe - probe.adjoint()).cwiseAbs().maxCoeff() <= 1e-10, "moment_channel_mc: probe must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(probe);
  if (es.info() != Eigen::Success) throw NumericalError("moment_channel_mc: probe eigendecomposition failed");
  std::vector<std::pair<double, Vector>> terms;
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < total; ++i)
    if (std::abs(es.eigenvalues()(i)) > 1e-14 * scale) terms.emplace_back(es.eigenvalues()(i), es.eigenvectors().col(i));

  struct Partial {
    Matrix sum;
    double sumsq = 0.0;
  };
  auto chunk = [&](std::size_t b, std::size_t e) {
    Partial p{Matrix::Zero(total, total), 0.0};
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const Matrix u = unitary_of(ensemble.sample(rng));
      Matrix x = Matrix::Zero(total, total);
      for (const auto& [lambda, vec] : terms) {
        const Vector w = apply_tensor_power(u, k, vec);
        x.noalias() += lambda * (w * w.adjoint());
      }
      p.sum += x;
      p.sumsq += x.squaredNorm();
    }
    return p;
  };
  auto combine = [](const Partial& a, const Partial& b) { return Partial{a.sum + b.sum, a.sumsq + b.sumsq}; };
  const Partial r = chunked_reduce<Partial>(samples, kSampleChunk, policy, chunk, combine);
  const double s = static_cast<double>(samples);
  Matrix mean = r.sum / s;
  const double var = std::max(0.0, r.sumsq / s - mean.squaredNorm());
  MomentEstimate est;
  est.k = k;
  est.n = n;
  est.mean_channel_output = MomentOperatorDense{k, static_cast<int>(pow2(n)), std::move(mean)};
  est.sample_count = samples;
  est.standard_error = std::sqrt(var / (s - 1.0));
  return est;
}

inline MomentEstimate moment_channel_mc(const BrickworkSpec& spec, int k, const Matrix& probe, std::size_t samples,
                                        std::uint64_t seed, const ExecPolicy& policy = {}) {
  return moment_channel_mc(Ensemble::brickwork(spec), k, probe, samples, seed, policy);
}

// ---------------------------------------------------------- frame potential

struct FramePotential {
  double estimate = 0.0;
  double std_error = 0.0;
  double haar_reference = 0.0;  // k!
  std::size_t pairs = 0;
};

/// Mean of |tr(U^† V)|^{2k} over independent pairs.
inline FramePotential frame_potential(const Ensemble& ensemble, int k, std::size_t pairs, std::uint64_t seed,
                                      const ExecPolicy& policy = {}) {
  detail::require(k >= 1 && k <= 4, "frame_potential: k must lie in [1, 4]");
  detail::require_cap(ensemble.n() <= 12, "frame_potential: n exceeds 12");
  detail::require(pairs >= 2, "frame_potential: need at least two pairs");
  auto chunk = [&](std::size_t b, std::size_t e) {
    MeanAccumulator acc;
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const Matrix u = unitary_of(ensemble.sample(rng));
      const Matrix v = unitary_of(ensemble.sample(rng));
      acc.add(std::pow(std::abs((u.adjoint() * v).trace()), 2.0 * k));
    }
    return acc;
  };
  const auto acc = chunked_reduce<MeanAccumulator>(pairs, kSampleChunk, policy, chunk, MeanAccumulator::combine);
  return {acc.mean(), acc.std_error(), static_cast<double>(factorial(k)), pairs};
}

// ------------------------------------------------------- collision statistics

enum class ProductBasis { Haar, Clifford };

struct CollisionReport {
  double z_estimate = 0.0;
  double std_error = 0.0;
  double haar_reference = 0.0;    // 2D/(D+1)
  double lower_bound_value = 0.0;  // 1 + n/3^L
  int light_cone = 0;              // L, measured on the sampled circuits
  std::optional<int> depth_for_bound;
  std::optional<double> depth_bound_value;  // 1 + n/3^{2d}
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool stabilizer_backend = false;
};

/// Largest forward light cone of a single qubit.
inline int max_single_qubit_lightcone(const Circuit& c) {
  int best = 0;
  for (int q = 0; q < c.n(); ++q) best = std::max(best, static_cast<int>(lightcone(c, {q}).size()));
  return best;
}

inline Layer random_product_basis_layer(int n, ProductBasis basis, RngStream& rng) {
  Layer l;
  for (int q = 0; q < n; ++q) {
    if (basis == ProductBasis::Haar) l.push_back(Gate{{q}, DenseUnitary{sample_haar_unitary(1, rng)}});
    else l.push_back(Gate{{q}, sample_random_clifford(1, rng)});
  }
  return l;
}

/// Z = 2^n E Σ_x p_{U,v}(x)², where U is drawn from the ensemble and v is a
/// product of independent random single-qubit unitaries. Clifford ensembles
/// measured in a Clifford product basis use the stabilizer backend.
inline CollisionReport collision_probability(const Ensemble& ensemble, std::size_t samples, std::uint64_t seed,
                                             ProductBasis basis = ProductBasis::Haar,
                                             std::optional<int> depth_for_bound = std::nullopt,
                                             const ExecPolicy& policy = {}) {
  const int n = ensemble.n();
  detail::require(samples >= 2, "collision_probability: need at least two samples");
  const bool stab = ensemble.is_clifford() && basis == ProductBasis::Clifford;
  if (!stab) detail::require_cap(n <= kMaxDenseQubits, "collision_probability: dense backend limited to 20 qubits");
  struct Partial {
    MeanAccumulator acc;
    int cone = 0;
  };
  const double dim = std::ldexp(1.0, n);
  auto chunk = [&](std::size_t b, std::size_t e) {
    Partial p;
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      Circuit c = ensemble.sample(rng);
      p.cone = std::max(p.cone, max_single_qubit_lightcone(c));
      c.add_layer(random_product_basis_layer(n, basis, rng));
      double mass;
      if (stab) mass = run_stabilizer(c, StabilizerTableau(n)).collision_mass();
      else mass = run_dense(c, StateVector::zero(n)).probabilities().squaredNorm();
      p.acc.add(dim * mass);
    }
    return p;
  };
  auto combine = [](const Partial& a, const Partial& b) {
    return Partial{MeanAccumulator::combine(a.acc, b.acc), std::max(a.cone, b.cone)};
  };
  const Partial r = chunked_reduce<Partial>(samples, kSampleChunk, policy, chunk, combine);
  CollisionReport rep;
  rep.z_estimate = r.acc.mean();
  rep.std_error = r.acc.std_error();
  rep.haar_reference = 2.0 * dim / (dim + 1.0);
  rep.light_cone = r.cone;
  rep.lower_bound_value = 1.0 + n / std::pow(3.0, r.cone);
  if (depth_for_bound) {
    rep.depth_for_bound = depth_for_bound;
    rep.depth_bound_value = 1.0 + n / std::pow(3.0, 2.0 * *depth_for_bound);
  }
  rep.samples = samples;
  rep.seed = seed;
  rep.stabilizer_backend = stab;
  detail::require(rep.z_estimate >= 1.0 - 1e-9, "collision_probability: estimate below the Cauchy-Schwarz floor");
  return rep;
}

// --------------------------------------------------------- SWAP-test purity

/// Tr over the complement of `subset`; local bit j of the result is subset[j].
inline Matrix partial_trace_operator(const Matrix& m, int n, const std::vector<int>& subset) {
  const int s = static_cast<int>(subset.size());
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (std::find(subset.begin(), subset.end(), q) == subset.end()) rest.push_back(q);
  auto embed = [](std::uint64_t local, const std::vector<int>& where) {
    std::uint64_t x = 0;
    for (std::size_t j = 0; j < where.size(); ++j)
      if ((local >> j) & 1U) x |= std::uint64_t{1} << where[j];
    return static_cast<Eigen::Index>(x);
  };
  const auto ds = static_cast<Eigen::Index>(pow2(s));
  const std::uint64_t dr = pow2(static_cast<int>(rest.size()));
  std::vector<Eigen::Index> sub_idx(static_cast<std::size_t>(ds));
  for (Eigen::Index a = 0; a < ds; ++a) sub_idx[a] = embed(static_cast<std::uint64_t>(a), subset);
  Matrix out = Matrix::Zero(ds, ds);
  for (std::uint64_t r = 0; r < dr; ++r) {
    const Eigen::Index off = embed(r, rest);
    for (Eigen::Index a = 0; a < ds; ++a)
      for (Eigen::Index b = 0; b < ds; ++b) out(a, b) += m(sub_idx[a] + off, sub_idx[b] + off);
  }
  return out;
}

/// Haar average of tr(ρ_L²) for ρ = (I + U Z U^†)/2^n.
inline double swap_test_haar_reference(int n, int L) {
  const double dl = std::ldexp(1.0, -L);
  return dl + dl * (std::ldexp(1.0, 2 * L) - 1.0) / (std::ldexp(1.0, 2 * n) - 1.0);
}

struct SwapTestReport {
  double purity_mean = 0.0;
  double std_error = 0.0;
  double haar_reference = 0.0;     // at the light-cone size of the first sample
  double light_cone_value = 0.0;   // 2^{-L+1}
  int light_cone_size = 0;
  double max_dev_from_light_cone_value = 0.0;
  std::size_t samples = 0;
};

/// tr(ρ_𝔏²) for ρ = (I + U Z_0 U^†)/2^n, exact per sampled U. With no
/// explicit set, 𝔏 is the forward light cone of qubit 0 in each sample.
inline SwapTestReport swap_test_lower_bound(const Ensemble& ensemble, std::size_t samples, std::uint64_t seed,
                                            std::optional<std::vector<int>> lightcone_set = std::nullopt,
                                            const ExecPolicy& policy = {}) {
  const int n = ensemble.n();
  detail::require_cap(n <= 12, "swap_test_lower_bound: n exceeds 12");
  if (lightcone_set) detail::require_cap(lightcone_set->size() <= 12, "swap_test_lower_bound: set exceeds 12 qubits");
  detail::require(samples >= 1, "swap_test_lower_bound: need samples");
  const Matrix z0 = PauliString::single(n, 0, 'Z').dense();
  const double dim = std::ldexp(1.0, n);
  struct Partial {
    MeanAccumulator acc;
    double dev = 0.0;
    int size = 0;
  };
  auto chunk = [&](std::size_t b, std::size_t e) {
    Partial p;
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const Circuit c = ensemble.sample(rng);
      std::vector<int> set;
      if (lightcone_set) {
        set = *lightcone_set;
      } else {
        const auto cone = lightcone(c, {0});
        set.assign(cone.begin(), cone.end());
      }
      detail::require_cap(set.size() <= 12, "swap_test_lower_bound: light cone exceeds 12 qubits");
      const Matrix u = unitary_of(c);
      const Matrix ml = partial_trace_operator(u * z0 * u.adjoint(), n, set);
      const int L = static_cast<int>(set.size());
      const double purity = std::ldexp(1.0, -L) + ml.squaredNorm() / (dim * dim);
      p.acc.add(purity);
      p.dev = std::max(p.dev, std::abs(purity - std::ldexp(1.0, 1 - L)));
      if (i == 0) p.size = L;
    }
    return p;
  };
  auto combine = [](const Partial& a, const Partial& b) {
    return Partial{MeanAccumulator::combine(a.acc, b.acc), std::max(a.dev, b.dev), a.size ? a.size : b.size};
  };
  const Partial r = chunked_reduce<Partial>(samples, kSampleChunk, policy, chunk, combine);
  SwapTestReport rep;
  rep.purity_mean = r.acc.mean();
  rep.std_error = r.acc.std_error();
  rep.light_cone_size = r.size;
  rep.haar_reference = swap_test_haar_reference(n, r.size);
  rep.light_cone_value = std::ldexp(1.0, 1 - r.size);
  rep.max_dev_from_light_cone_value = r.dev;
  rep.samples = samples;
  return rep;
}

// ------------------------------------------------------------- EPR test

struct EprProfile {
  std::vector<double> fidelity;   // mean Bell fidelity of pair (q, q + n)
  std::vector<double> std_error;
  double mean_fidelity = 0.0;     // averaged over pairs
  double mean_std_error = 0.0;
  std::size_t samples = 0;
};

/// Prepares (Z_0 ⊗ 1)|EPR⟩ on n system + n reference qubits, applies V ⊗ V
/// with V drawn from the ensemble, and reports each pair's Bell fidelity.
/// Real orthogonal V leave every pair outside the light cone of qubit 0
/// untouched, since (O ⊗ O)|EPR⟩ = |EPR⟩.
inline EprProfile orthogonal_epr_test(const Ensemble& ensemble, std::size_t samples, std::uint64_t seed,
                                      const ExecPolicy& policy = {}) {
  const int n = ensemble.n();
  detail::require_cap(n <= 8, "orthogonal_epr_test: n exceeds 8");
  detail::require(samples >= 2, "orthogonal_epr_test: need at least two samples");
  struct Partial {
    std::vector<MeanAccumulator> pairs;
    MeanAccumulator avg;
  };
  auto chunk = [&](std::size_t b, std::size_t e) {
    Partial p{std::vector<MeanAccumulator>(n), {}};
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const Circuit v = ensemble.sample(rng);
      Circuit c(2 * n);
      Layer h, cx;
      for (int q = 0; q < n; ++q) {
        h.push_back(Gate::named(GateName::H, {q}));
        cx.push_back(Gate::named(GateName::CNOT, {q, q + n}));
      }
      c.add_layer(h);
      c.add_layer(cx);
      c.add_layer({Gate::named(GateName::Z, {0})});
      std::vector<int> shift(n);
      for (int q = 0; q < n; ++q) shift[q] = q + n;
      for (const auto& layer : v.layers()) {
        Layer both = layer;
        for (const auto& g : layer) {
          Gate r = g;
          for (int& q : r.qubits) q = shift[q];
          both.push_back(std::move(r));
        }
        c.add_layer(std::move(both));
      }
      const StateVector out = run_dense(c, StateVector::zero(2 * n));
      double sum = 0.0;
      for (int q = 0; q < n; ++q) {
        const Matrix rho = out.reduced_density({q, q + n});
        const double f = 0.5 * (rho(0, 0).real() + rho(3, 3).real() + 2.0 * rho(0, 3).real());
        p.pairs[q].add(f);
        sum += f;
      }
      p.avg.add(sum / n);
    }
    return p;
  };
  auto combine = [](const Partial& a, const Partial& b) {
    Partial r{a.pairs, MeanAccumulator::combine(a.avg, b.avg)};
    for (std::size_t q = 0; q < r.pairs.size(); ++q) r.pairs[q] = MeanAccumulator::combine(a.pairs[q], b.pairs[q]);
    return r;
  };
  const Partial r = chunked_reduce<Partial>(samples, kSampleChunk, policy, chunk, combine);
  EprProfile prof;
  for (const auto& a : r.pairs) {
    prof.fidelity.push_back(a.mean());
    prof.std_error.push_back(a.std_error());
  }
  prof.mean_fidelity = r.avg.mean();
  prof.mean_std_error = r.avg.std_error();
  prof.samples = samples;
  return prof;
}

}  // namespace lowdepth
