#pragma once

#include <cstdint>
#include <functional>

namespace tic {

// Runs fn(begin, end) over a static partition of [0, count) on `threads`
// workers. Work items must be independent; results must not depend on the
// partition.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

// --threads / TIC_THREADS resolution; returns at least 1.
int resolve_threads(int requested);

}  // namespace tic
