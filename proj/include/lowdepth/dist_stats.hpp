#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/parallel.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/core/stats.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {

inline constexpr double kDistributionSumTol = 1e-10;

struct OutputDistribution {
  int n = 0;
  RealVector probabilities;

  static OutputDistribution from(RealVector p) {
    int n = 0;
    while ((Eigen::Index{1} << n) < p.size()) ++n;
    detail::require((Eigen::Index{1} << n) == p.size(), "distribution length must be a power of two");
    detail::require(p.minCoeff() >= -kDistributionSumTol, "distribution has negative entries");
    detail::require(std::abs(p.sum() - 1.0) <= kDistributionSumTol, "distribution does not sum to 1");
    return {n, std::move(p)};
  }

  static OutputDistribution uniform(int n) {
    const auto d = static_cast<Eigen::Index>(pow2(n));
    return {n, RealVector::Constant(d, 1.0 / static_cast<double>(d))};
  }
};

/// Output distribution of circuit c on |0^n⟩.
inline OutputDistribution output_distribution(const Circuit& c) {
  return OutputDistribution::from(run_dense(c, StateVector::zero(c.n())).probabilities());
}

/// Σ_x P(x)^k.
inline double k_norm(const OutputDistribution& p, int k) {
  detail::require(k >= 1, "k_norm: k must be >= 1");
  return p.probabilities.array().pow(static_cast<double>(k)).sum();
}

/// Haar value k!/((D+1)...(D+k-1)) of E Σ_x P(x)^k, and its large-D form k!/D^{k-1}.
inline double haar_knorm_mean(int n, int k) {
  const double d = std::ldexp(1.0, n);
  double v = 1.0;
  for (int i = 1; i < k; ++i) v *= static_cast<double>(i + 1) / (d + i);
  return v;
}

inline double knorm_reference(int n, int k) {
  return std::exp(std::lgamma(k + 1.0) - (k - 1) * n * std::log(2.0));
}

/// Haar probability of observing the strings x_1..x_N in N independent
/// measurements of U|0^n⟩: ∏_j m_j! / ∏_{i<N}(D+i), m_j the multiplicities.
inline double haar_joint_probability(const std::vector<std::uint64_t>& strings, int n) {
  detail::require(!strings.empty() && strings.size() <= 8, "haar_joint_probability: need 1..8 strings");
  const double d = std::ldexp(1.0, n);
  std::map<std::uint64_t, int> mult;
  for (auto s : strings) {
    detail::require(s < pow2(n), "haar_joint_probability: string out of range");
    ++mult[s];
  }
  double num = 1.0, den = 1.0;
  for (const auto& [s, m] : mult) num *= std::tgamma(m + 1.0);
  for (std::size_t i = 0; i < strings.size(); ++i) den *= d + static_cast<double>(i);
  return num / den;
}

struct TvBound {
  double tv_exact = 0.0;
  double paper_bound = 0.0;  // N²/2^{n−1}
};

namespace detail {

inline void partitions(int remaining, int max_part, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions(remaining - p, p, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

/// Exact total-variation distance between N Haar-output samples and N uniform
/// samples. Tuples are grouped by multiplicity pattern λ ⊢ N: a pattern with
/// ℓ parts covers N!/(∏λ_i! ∏_j c_j!) · D(D−1)...(D−ℓ+1) tuples, c_j the
/// number of parts equal to j.
inline TvBound tv_haar_vs_uniform(int n, int N) {
  detail::require(N >= 1, "tv_haar_vs_uniform: N must be >= 1");
  detail::require_cap(N <= 4 && n >= 1 && n <= 10, "tv_haar_vs_uniform: requires N <= 4 and n <= 10");
  const double d = std::ldexp(1.0, n);
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  detail::partitions(N, N, cur, parts);
  double den = 1.0;
  for (int i = 0; i < N; ++i) den *= d + i;
  const double p_unif = std::pow(d, -static_cast<double>(N));
  double tv = 0.0;
  for (const auto& lambda : parts) {
    double lam_fact = 1.0, count = std::tgamma(N + 1.0);
    std::map<int, int> c;
    for (int l : lambda) {
      lam_fact *= std::tgamma(l + 1.0);
      ++c[l];
    }
    count /= lam_fact;
    for (const auto& [part, cnt] : c) count /= std::tgamma(cnt + 1.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) count *= d - static_cast<double>(i);
    tv += count * std::abs(lam_fact / den - p_unif);
  }
  TvBound r;
  r.tv_exact = 0.5 * tv;
  r.paper_bound = static_cast<double>(N) * N / std::ldexp(1.0, n - 1);
  detail::require(r.tv_exact <= r.paper_bound, "tv_haar_vs_uniform: exact value exceeds the bound");
  return r;
}

/// ½‖P − u‖₁.
inline double tv_to_uniform(const OutputDistribution& p) {
  const double u = 1.0 / static_cast<double>(p.probabilities.size());
  return 0.5 * (p.probabilities.array() - u).abs().sum();
}

/// Berger's inequality ‖v‖₁ ≥ ‖v‖₂³/‖v‖₄², halved for TV, with v = P − u.
inline double berger_tv_lower_bound(const OutputDistribution& p) {
  const double u = 1.0 / static_cast<double>(p.probabilities.size());
  const Eigen::ArrayXd v = p.probabilities.array() - u;
  const double l2sq = v.square().sum(), l4sq = std::sqrt(v.square().square().sum());
  if (l4sq == 0.0) return 0.0;
  return 0.5 * std::pow(l2sq, 1.5) / l4sq;
}

struct CircuitStats {
  std::uint64_t circuit_seed = 0;  // stream id of the sampled circuit
  double tv = 0.0;
  double berger = 0.0;
  double knorm_2 = 0.0;
  double knorm_3 = 0.0;
};

struct FarFromUniformReport {
  std::vector<CircuitStats> circuits;
  double fraction_tv_ge_threshold = 0.0;
  double threshold = 0.1;
  double mean_tv = 0.0;
  double mean_tv_std_error = 0.0;
};

/// Exact statistics of P_U for each of `count` circuits; circuit i is drawn
/// from stream (seed, i).
inline FarFromUniformReport far_from_uniform_report(const Ensemble& ensemble, std::size_t count, std::uint64_t seed,
                                                    double threshold = 0.1, const ExecPolicy& policy = {}) {
  detail::require_cap(ensemble.n() <= 14, "far_from_uniform_report: n exceeds 14");
  FarFromUniformReport r;
  r.threshold = threshold;
  r.circuits = parallel_map<CircuitStats>(count, policy, [&](std::size_t i) {
    RngStream rng(seed, i);
    const auto p = output_distribution(ensemble.sample(rng));
    return CircuitStats{i, tv_to_uniform(p), berger_tv_lower_bound(p), k_norm(p, 2), k_norm(p, 3)};
  });
  MeanAccumulator acc;
  std::size_t far = 0;
  for (const auto& c : r.circuits) {
    acc.add(c.tv);
    if (c.tv >= threshold) ++far;
  }
  r.fraction_tv_ge_threshold = count ? static_cast<double>(far) / static_cast<double>(count) : 0.0;
  r.mean_tv = acc.mean();
  r.mean_tv_std_error = acc.std_error();
  return r;
}

inline std::string circuit_stats_csv(const std::vector<CircuitStats>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "circuit_seed,tv,berger,knorm_2,knorm_3\n";
  for (const auto& r : rows) out << r.circuit_seed << ',' << r.tv << ',' << r.berger << ',' << r.knorm_2 << ',' << r.knorm_3 << '\n';
  return out.str();
}

struct KnormProbe {
  double tail_frequency = 0.0;   // fraction with |Σp^k − ref| ≥ a·ref
  double tail_std_error = 0.0;
  double reference = 0.0;        // k!/2^{(k−1)n}
  double mean_knorm = 0.0;
  double haar_mean = 0.0;        // exact Haar expectation
  double chebyshev_bound = 0.0;  // (ε + k² 2^{−n}) / a² with unit constant
  std::size_t circuits = 0;
};

/// Empirical tail frequency of the relative k-norm deviation, with the bound
/// evaluated for a caller-supplied ε (the implied constant is taken as 1).
inline KnormProbe knorm_concentration_probe(const Ensemble& ensemble, int k, std::size_t circuits, double a,
                                            std::uint64_t seed, double eps = 0.0, const ExecPolicy& policy = {}) {
  const int n = ensemble.n();
  detail::require(k >= 1 && k <= 4, "knorm_concentration_probe: k must lie in [1, 4]");
  detail::require_cap(n <= 12, "knorm_concentration_probe: n exceeds 12");
  detail::require(a > 0, "knorm_concentration_probe: a must be positive");
  KnormProbe r;
  r.reference = knorm_reference(n, k);
  r.haar_mean = haar_knorm_mean(n, k);
  const auto values = parallel_map<double>(circuits, policy, [&](std::size_t i) {
    RngStream rng(seed, i);
    return k_norm(output_distribution(ensemble.sample(rng)), k);
  });
  MeanAccumulator hits, mean;
  for (double v : values) {
    hits.add(std::abs(v - r.reference) >= a * r.reference ? 1.0 : 0.0);
    mean.add(v);
  }
  r.tail_frequency = hits.mean();
  r.tail_std_error = hits.std_error();
  r.mean_knorm = mean.mean();
  r.chebyshev_bound = (eps + k * k * std::ldexp(1.0, -n)) / (a * a);
  r.circuits = circuits;
  return r;
}

}  // namespace lowdepth
