#pragma once

#include <cstdint>
#include <functional>

namespace crl::par {

// Worker cap from CORRECTOR_LAB_THREADS; unset or 0 means hardware
// concurrency. Always at least 1.
unsigned thread_count();

// Runs fn(begin, end) over a fixed partition of [0, n). Chunk boundaries
// depend only on n, so callers that write disjoint per-index slots get
// identical results at any thread count.
void parallel_for(std::uint64_t n,
                  const std::function<void(std::uint64_t, std::uint64_t)>& fn);

} // namespace crl::par
