#pragma once

#include <cstddef>
#include <functional>

namespace ddgk {

// Number of workers to use when the caller asks for `requested` (0 = all
// hardware threads), capped by the amount of work.
int resolve_workers(int requested, std::size_t tasks);

// Calls fn(i) for every i in [0, n) on up to `workers` threads. Tasks are
// claimed in index order. The first exception thrown by any task is rethrown
// after all workers have stopped; remaining tasks are abandoned.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace ddgk
