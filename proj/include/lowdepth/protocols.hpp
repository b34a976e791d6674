#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/parallel.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/core/stats.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/geometry.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {

// ----------------------------------------------------------- time reversal

struct TimeReversalConfig {
  int side = 3;        // grid is side x side, vertex r*side + c
  int depth = 1;       // local layers
  double theta = kPi / 2;
  int perturbed = 0;   // qubit i
  std::optional<std::vector<int>> partner;  // j(i) per qubit; antipodal when empty
  std::size_t runs = 2000;

  int n() const { return side * side; }
};

/// Antipodal vertex (r, c) -> (side-1-r, side-1-c).
inline std::vector<int> antipodal_partners(int side) {
  std::vector<int> j(side * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) j[r * side + c] = (side - 1 - r) * side + (side - 1 - c);
  return j;
}

inline std::vector<int> partners_of(const TimeReversalConfig& cfg) {
  return cfg.partner ? *cfg.partner : antipodal_partners(cfg.side);
}

inline void validate_time_reversal(const TimeReversalConfig& cfg) {
  detail::require(cfg.side >= 2, "time reversal: grid side must be >= 2");
  detail::require_cap(cfg.n() <= 16, "time reversal: dense simulation limited to 16 qubits");
  detail::require(cfg.depth >= 0, "time reversal: depth must be >= 0");
  detail::require(2.0 * cfg.depth < cfg.side, "time reversal: depth must be below side/2");
  detail::require(cfg.perturbed >= 0 && cfg.perturbed < cfg.n(), "time reversal: perturbed qubit out of range");
  const auto j = partners_of(cfg);
  detail::require(static_cast<int>(j.size()) == cfg.n(), "time reversal: partner map has wrong size");
  const Geometry g = grid_geometry(cfg.side, cfg.side);
  const int dist = g.distance(cfg.perturbed, j[cfg.perturbed]);
  detail::require(2.0 * dist >= cfg.side, "time reversal: partner of the perturbed qubit is closer than side/2");
}

/// d layers of Haar two-qubit gates cycling through horizontal-even,
/// horizontal-odd, vertical-even and vertical-odd bonds.
inline Circuit local_grid_circuit(int side, int depth, RngStream& rng) {
  Circuit c(side * side);
  for (int t = 0; t < depth; ++t) {
    const int pattern = t % 4, parity = pattern % 2;
    Layer l;
    for (int r = 0; r < side; ++r)
      for (int col = 0; col < side; ++col) {
        if (pattern < 2 && col % 2 == parity && col + 1 < side)
          l.push_back(sample_gate(TwoQubitKind::Haar, {r * side + col, r * side + col + 1}, rng));
        if (pattern >= 2 && r % 2 == parity && r + 1 < side)
          l.push_back(sample_gate(TwoQubitKind::Haar, {r * side + col, (r + 1) * side + col}, rng));
      }
    c.add_layer(std::move(l));
  }
  return c;
}

/// One RZZ(θ) = exp(−iθ/2 Z⊗Z) on each unordered pair {i, j(i)}, i ≠ j(i).
/// With this convention U_LR X_i U_LR^† = cos θ X_i + sin θ Y_i Z_{j(i)}.
inline Circuit long_range_layer(int n, const std::vector<int>& partner, double theta) {
  Circuit c(n);
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    if (partner[i] != i) pairs.insert(std::minmax(i, partner[i]));
  std::vector<bool> used(n, false);
  Layer l;
  for (auto [a, b] : pairs) {
    if (used[a] || used[b]) {
      if (!l.empty()) c.add_layer(std::move(l));
      l.clear();
      used.assign(n, false);
    }
    l.push_back(Gate::named(GateName::RZZ, {a, b}, theta));
    used[a] = used[b] = true;
  }
  if (!l.empty()) c.add_layer(std::move(l));
  return c;
}

struct TimeReversalResult {
  double faraway_one_frequency = 0.0;
  double std_error = 0.0;
  double threshold = 0.0;  // (2/3) sin²θ
  std::vector<int> faraway;
  std::size_t n_runs = 0;
  std::uint64_t seed = 0;
  bool with_long_range = false;
};

/// Samples a local circuit U_2D once (stream (seed, 0)); with long-range
/// coupling U = U_2D U_LR. Run r (stream (seed, r + 1)) draws a random
/// single-qubit Clifford product v, samples x from v U X_i U^† v^†|0^n⟩, and
/// flags any 1 outside the light cone of i in U_2D.
inline TimeReversalResult time_reversal_experiment(const TimeReversalConfig& cfg, bool with_long_range,
                                                   std::uint64_t seed, const ExecPolicy& policy = {}) {
  validate_time_reversal(cfg);
  const int n = cfg.n(), i = cfg.perturbed;
  RngStream circuit_rng(seed, 0);
  const Circuit local = local_grid_circuit(cfg.side, cfg.depth, circuit_rng);
  Circuit u(n);
  if (with_long_range) u.append(long_range_layer(n, partners_of(cfg), cfg.theta));
  u.append(local);
  const auto cone = lightcone(local, {i});
  TimeReversalResult res;
  for (int q = 0; q < n; ++q)
    if (!cone.count(q)) res.faraway.push_back(q);
  Circuit core = u.inverse();
  core.add_layer({Gate::named(GateName::X, {i})});
  core.append(u);
  auto chunk = [&](std::size_t b, std::size_t e) {
    MeanAccumulator acc;
    for (std::size_t r = b; r < e; ++r) {
      RngStream rng(seed, r + 1);
      Layer v;
      for (int q = 0; q < n; ++q) v.push_back(Gate{{q}, sample_random_clifford(1, rng)});
      Circuit run(n);
      Layer vdg;
      for (const auto& g : v) vdg.push_back(g.inverse());
      run.add_layer(std::move(vdg));
      run.append(core);
      run.add_layer(std::move(v));
      const std::uint64_t x = run_dense(run, StateVector::zero(n)).born_sample(rng);
      bool hit = false;
      for (int q : res.faraway) hit = hit || ((x >> q) & 1U);
      acc.add(hit ? 1.0 : 0.0);
    }
    return acc;
  };
  const auto acc = chunked_reduce<MeanAccumulator>(cfg.runs, 64, policy, chunk, MeanAccumulator::combine);
  res.faraway_one_frequency = acc.mean();
  res.std_error = acc.std_error();
  res.threshold = 2.0 / 3.0 * std::pow(std::sin(cfg.theta), 2);
  res.n_runs = cfg.runs;
  res.seed = seed;
  res.with_long_range = with_long_range;
  return res;
}

// ------------------------------------------------------ purity distinguisher

struct PureStateSource {
  Ensemble ensemble;  // state U|0^n⟩ with U drawn once per trial
};
struct MaximallyMixedSource {
  int n = 0;  // each copy is an independent uniformly random basis state
};
using StateSource = std::variant<PureStateSource, MaximallyMixedSource>;

struct PurityDecision {
  double statistic = 0.0;  // mean SWAP-test outcome (±1), an unbiased purity estimate
  bool decided_pure = false;
  std::size_t pairs = 0;
};

/// M SWAP tests on pairs of copies. A test on |a⟩, |b⟩ returns +1 with
/// probability (1 + |⟨a|b⟩|²)/2. Decides "pure" when the mean exceeds
/// 1/2 + margin.
inline PurityDecision purity_distinguisher(const StateSource& source, std::size_t M, RngStream& rng,
                                           double margin = 0.0) {
  detail::require(M >= 1, "purity_distinguisher: need at least one pair");
  MeanAccumulator acc;
  if (const auto* p = std::get_if<PureStateSource>(&source)) {
    detail::require_cap(p->ensemble.n() <= 12, "purity_distinguisher: n exceeds 12");
    const Vector psi = run_dense(p->ensemble.sample(rng), StateVector::zero(p->ensemble.n())).amplitudes();
    for (std::size_t m = 0; m < M; ++m) {
      double overlap = std::norm(psi.dot(psi));
      if (std::abs(overlap - 1.0) < 1e-12) overlap = 1.0;
      acc.add(rng.uniform() < 0.5 * (1.0 + overlap) ? 1.0 : -1.0);
    }
  } else {
    const int n = std::get<MaximallyMixedSource>(source).n;
    detail::require_cap(n >= 1 && n <= 12, "purity_distinguisher: n must lie in [1, 12]");
    for (std::size_t m = 0; m < M; ++m) {
      const std::uint64_t a = rng.below(pow2(n)), b = rng.below(pow2(n));
      const double overlap = a == b ? 1.0 : 0.0;
      acc.add(rng.uniform() < 0.5 * (1.0 + overlap) ? 1.0 : -1.0);
    }
  }
  PurityDecision d;
  d.statistic = acc.mean();
  d.decided_pure = d.statistic > 0.5 + margin;
  d.pairs = M;
  return d;
}

}  // namespace lowdepth
