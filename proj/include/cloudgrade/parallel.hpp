#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cloudgrade {

/// Worker count used when a caller passes jobs <= 0.
int default_jobs();

/// Set the process-wide default worker count (0 restores hardware concurrency).
void set_default_jobs(int jobs);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out in
/// contiguous blocks; callers must write results to disjoint slots so the
/// output is identical for any job count. The first exception thrown by a
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace cloudgrade
