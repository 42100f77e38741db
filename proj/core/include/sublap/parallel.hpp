#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sublap {

/// Worker count used by data-parallel loops. Defaults to the SUBLAP_THREADS
/// environment variable, or 1 when unset.
int thread_count();
void set_thread_count(int threads);

/// Runs task(i) for i in [0, count) on up to thread_count() workers.
/// Each task must write only to its own output slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

/// Splits [0, n) into fixed-size chunks, evaluates chunk(begin, end) for each,
/// and folds the partials with a fixed pairwise tree. The result does not
/// depend on the worker count.
template <class T, class ChunkFn, class Combine>
T deterministic_reduce(std::size_t n, std::size_t chunk_size, ChunkFn&& chunk, Combine&& combine) {
  const std::size_t chunks = n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
  std::vector<T> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = begin + chunk_size < n ? begin + chunk_size : n;
    partial[c] = chunk(begin, end);
  });
  if (chunks == 0) return T{};
  for (std::size_t stride = 1; stride < chunks; stride *= 2) {
    for (std::size_t i = 0; i + stride < chunks; i += 2 * stride) {
      combine(partial[i], partial[i + stride]);
    }
  }
  return std::move(partial[0]);
}

}  // namespace sublap
