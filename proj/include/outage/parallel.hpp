#pragma once

#include <cstddef>
#include <functional>

namespace outage {

/// Worker count: OUTAGE_WORKERS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Every index
/// runs even if some throw; afterwards the exception of the lowest failing
/// index is rethrown. Calls made from inside a worker run inline, so one
/// pool serves nested loops.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace outage
