#pragma once

#include <cstddef>
#include <functional>

namespace scalelab {

/// Worker count: `requested` if nonzero, else SCALE_LAB_THREADS if set, else the hardware concurrency.
std::size_t thread_count(std::size_t requested = 0);

/// Runs body(0) ... body(n - 1) on up to `threads` workers. The first exception is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace scalelab
