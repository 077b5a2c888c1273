#pragma once

#include <cstddef>
#include <functional>

namespace cirsense {

/// Number of worker threads used by parallel_for. Honors CIRSENSE_THREADS,
/// otherwise std::thread::hardware_concurrency().
unsigned worker_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
/// write results into pre-sized slots so output never depends on scheduling.
/// Exceptions from workers are rethrown (lowest index first).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned max_threads = 0);

}  // namespace cirsense
