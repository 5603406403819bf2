#pragma once

#include <cstddef>
#include <functional>

namespace qwg {

// Worker count: QWG_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is
// processed exactly once; the first exception raised by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace qwg
