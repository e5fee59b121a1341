#pragma once

#include <cstddef>
#include <functional>

namespace sfi {

/// Worker count from RECOVER_THREADS, else hardware concurrency (at least 1).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

} // namespace sfi
