#pragma once

#include <cstddef>
#include <functional>

namespace mousepose {

// Number of worker threads: MOUSEPOSE_THREADS if set, else hardware count.
int workerCount();

// Runs fn(i) for i in [0, count) across the worker pool. Tasks must write to
// disjoint state; results are deterministic because each task owns its slot.
// Exceptions from tasks are rethrown on the calling thread.
void parallelFor(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mousepose
