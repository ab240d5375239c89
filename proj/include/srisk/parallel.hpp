#pragma once

#include <cstddef>
#include <functional>

namespace srisk {

/// Worker count: hardware concurrency, capped by the SRISK_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Callers
/// write results into slot i, so output order never depends on scheduling.
/// If any call throws, the exception from the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace srisk
