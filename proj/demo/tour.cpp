// A short walk through the library: sample a brickwork circuit, compare its
// collision probability with Haar, route it onto a 2D grid and estimate a
// GHZ fidelity from log-depth Clifford shadows.

#include <cstdio>

#include "lowdepth/lowdepth.hpp"

namespace ld = lowdepth;

int main() {
  const int n = 8;
  const ld::BrickworkSpec spec{n, 2, ld::LocalKind::haar()};

  ld::RngStream rng(1, 0);
  const ld::Circuit c = ld::build_brickwork(spec, rng);
  std::printf("brickwork n=%d xi=%d: depth %d, %zu gates\n", n, spec.xi, c.depth(), c.gate_count());

  const auto z = ld::collision_probability(ld::Ensemble::brickwork(spec), 2000, 2);
  std::printf("collision Z = %.4f +- %.4f (Haar %.4f, lower bound 1+n/3^L %.4f)\n", z.z_estimate, z.std_error,
              z.haar_reference, z.lower_bound_value);

  const ld::Circuit line = ld::build_local_random_circuit(n, 4, rng);
  const auto grid = ld::grid_geometry(2, 4);
  const auto routed = ld::compile_1d_to_geometry(line, grid);
  const auto check = ld::verify_compilation(line, routed.circuit, routed.relabeling);
  std::printf("2x4 grid: %d swaps, depth overhead %.2f, equivalent=%s (dev %.1e)\n", routed.swap_count,
              routed.overhead, check.equal ? "yes" : "no", check.max_dev);

  ld::Circuit ghz(n);
  ghz.add_layer({ld::Gate::named(ld::GateName::H, {0})});
  for (int q = 0; q + 1 < n; ++q) ghz.add_layer({ld::Gate::named(ld::GateName::CNOT, {q, q + 1})});
  const auto snaps = ld::collect_shadows(ghz, ld::Ensemble::brickwork(ld::log_depth_shadow_spec(n)), 2000, 3);
  const auto est = ld::estimate_observable(snaps, ld::StabilizerProjector{ghz});
  std::printf("GHZ fidelity from %zu shadows: %.3f (median of %d means)\n", est.n_snapshots, est.value, est.batches);
  return 0;
}
