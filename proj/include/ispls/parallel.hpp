#pragma once

#include <cstddef>
#include <functional>

namespace ispls {

// Worker count resolution: explicit request > ISPLS_THREADS env > hardware.
// Always >= 1.
int worker_count(int requested = 0);

// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = resolve via
// worker_count). Items must be independent; any partial sums must be stored
// per item and reduced in index order by the caller, so results are identical
// for every worker count. Nested calls run serially on the calling thread.
// The first exception thrown by an item is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int workers = 0);

}  // namespace ispls
