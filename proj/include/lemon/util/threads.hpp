#pragma once

#include <cstdint>
#include <functional>

namespace lemon {

// Fan-out width for per-sample work: LEMON_THREADS if set, else hardware cores.
int thread_cap();

// Runs fn(i) for i in [0, n). Results must be written to per-index slots by the
// caller so the reduction order stays deterministic. Falls back to a serial
// loop when the cap is 1 or n is small.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace lemon
