#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "m3s/common.hpp"

namespace m3s {

/// Run body(i) for i in [0, n). Iterations must be independent.
template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::Parallel) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

/// Sum of chunk(begin, end) over fixed-size chunks of [0, n), combined in
/// chunk order so the result does not depend on the policy or thread count.
template <class T, class Chunk>
T chunked_sum(std::size_t n, std::size_t chunk_size, Exec exec, const T& zero, Chunk&& chunk) {
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<T> partial(chunks, zero);
  parallel_for(chunks, exec, [&](std::size_t c) {
    const std::size_t b = c * chunk_size;
    partial[c] = chunk(b, std::min(n, b + chunk_size));
  });
  T total = zero;
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace m3s
