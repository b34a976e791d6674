#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <optional>
#include <thread>
#include <vector>

namespace lowdepth {

struct ExecPolicy {
  unsigned threads = 0;  // 0 selects std::thread::hardware_concurrency()

  unsigned resolved() const {
    if (threads != 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
};

/// Pairwise tree reduction in index order; the association pattern depends
/// only on the number of inputs.
template <class T, class Combine>
T tree_reduce(std::vector<T> parts, Combine combine) {
  if (parts.empty()) return T{};
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(combine(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

/// Splits [0, count) into fixed-size chunks, evaluates `chunk_fn(begin, end)`
/// for each chunk (in parallel when allowed), then tree-reduces the chunk
/// results. Chunking is independent of the thread count, so the result is
/// bit-identical for any `policy`.
template <class T, class ChunkFn, class Combine>
T chunked_reduce(std::size_t count, std::size_t chunk, const ExecPolicy& policy, ChunkFn chunk_fn,
                 Combine combine) {
  if (count == 0) return T{};
  chunk = std::max<std::size_t>(1, chunk);
  const std::size_t n_chunks = (count + chunk - 1) / chunk;
  std::vector<std::optional<T>> results(n_chunks);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(policy.resolved(), n_chunks));
  auto run_chunk = [&](std::size_t c) {
    const std::size_t b = c * chunk;
    results[c].emplace(chunk_fn(b, std::min(count, b + chunk)));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }
  std::vector<T> parts;
  parts.reserve(n_chunks);
  for (auto& r : results) parts.push_back(std::move(*r));
  return tree_reduce(std::move(parts), combine);
}

/// Evaluates fn(i) for every index and returns the results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, const ExecPolicy& policy, Fn fn) {
  std::vector<std::optional<T>> out(count);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(policy.resolved(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i].emplace(fn(i));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) out[i].emplace(fn(i));
      });
    for (auto& th : pool) th.join();
  }
  std::vector<T> res;
  res.reserve(count);
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

}  // namespace lowdepth
