#pragma once

#include <cstddef>
#include <functional>

namespace sdidml {

/// Number of worker threads to use when the caller passes 0: the
/// SDIDML_THREADS environment variable if set, else hardware concurrency.
int default_thread_count();

/// Runs job(i) for i in [0, n) on up to `threads` workers. Jobs must write
/// only to their own output slot; the first exception (lowest index) is
/// rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job);

}  // namespace sdidml
