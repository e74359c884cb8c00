#pragma once

#include <cstddef>
#include <functional>

namespace nuqd {

/// Run fn(0..n_jobs-1) across a pool of threads (0 = hardware concurrency).
/// Jobs must be independent; results should be written to per-index slots so
/// aggregation stays order-independent. The first exception thrown by any job
/// is rethrown after all workers finish.
void parallel_for(std::size_t n_jobs, int threads, const std::function<void(std::size_t)>& fn);

} // namespace nuqd
