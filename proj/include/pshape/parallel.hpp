#pragma once

#include <functional>

namespace pshape {

// Worker count: min(PSHAPE_THREADS, hardware_concurrency), at least 1.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers must
// make results depend only on i (write to slot i, read shared state), so the
// outcome is independent of the thread schedule. Exceptions from fn are
// rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace pshape
