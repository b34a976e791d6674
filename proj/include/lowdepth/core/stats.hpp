#pragma once

#include <cmath>
#include <cstddef>

namespace lowdepth {

/// Running sum and sum of squares of scalar samples.
struct MeanAccumulator {
  double sum = 0.0;
  double sumsq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }

  /// Unbiased sample variance.
  double variance() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    return std::max(0.0, (sumsq - n * mean() * mean()) / (n - 1.0));
  }

  /// Standard error of the mean.
  double std_error() const { return count < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count)); }

  static MeanAccumulator combine(const MeanAccumulator& a, const MeanAccumulator& b) {
    return {a.sum + b.sum, a.sumsq + b.sumsq, a.count + b.count};
  }
};

}  // namespace lowdepth
