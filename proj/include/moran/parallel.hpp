#pragma once

#include <cstddef>
#include <functional>

namespace moran {

// Thread count resolution order: explicit request > set_default_threads >
// MORAN_ASG_THREADS > hardware concurrency. requested <= 0 means "not
// specified".
int resolve_thread_count(int requested);

// process-wide default consulted when a call site does not pass a count;
// 0 clears it
void set_default_threads(int threads);

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
// worker; callers own any output slots indexed by i, so merging is
// deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace moran
