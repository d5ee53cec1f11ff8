#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace crl::par {

unsigned thread_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("CORRECTOR_LAB_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0') n = static_cast<unsigned>(v);
    }
    if (n == 0) n = std::thread::hardware_concurrency();
    return std::max(1u, n);
}

void parallel_for(std::uint64_t n,
                  const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
    if (n == 0) return;
    const std::uint64_t workers = std::min<std::uint64_t>(thread_count(), n);
    // chunking is a function of n alone, never of the worker count
    const std::uint64_t chunks = std::min<std::uint64_t>(n, 256);
    const std::uint64_t size = (n + chunks - 1) / chunks;
    if (workers == 1) {
        fn(0, n);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto drain = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= chunks) return;
            const std::uint64_t begin = c * size;
            const std::uint64_t end = std::min(n, begin + size);
            if (begin < end) fn(begin, end);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::uint64_t t = 1; t < workers; ++t) pool.emplace_back(drain);
    drain();
    for (std::thread& t : pool) t.join();
}

} // namespace crl::par
