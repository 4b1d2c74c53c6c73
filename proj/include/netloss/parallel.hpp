#pragma once

#include <cstddef>
#include <functional>

namespace netloss {

// Worker count: NETLOSS_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
[[nodiscard]] unsigned worker_count();

// Runs task(j) for j in [0, n) on up to worker_count() threads. Tasks are
// handed out dynamically; callers write results into per-index slots so the
// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace netloss
