#pragma once

#include <cstddef>
#include <functional>

namespace geoflow {

/// Worker count from GEOFLOW_THREADS (default 1, values < 1 mean 1).
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is
/// split into contiguous blocks; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace geoflow
