// parallel.hpp - minimal fork/join helper for per-partition and per-subtree tasks.
#pragma once

#include <cstddef>
#include <functional>

namespace dynsp {

/// Runs fn(i) for i in [0, count) on up to `workers` threads and joins.
/// workers <= 1 runs inline. The first exception thrown by a task is
/// rethrown after all threads have joined.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Runs two tasks concurrently when workers > 1, otherwise a then b.
void parallel_pair(unsigned workers, const std::function<void()>& a, const std::function<void()>& b);

}  // namespace dynsp
