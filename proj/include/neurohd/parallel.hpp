#pragma once

// Minimal fork-join helper. Work is split into contiguous index ranges so
// accumulation patterns that assign each output element to exactly one range
// stay bit-identical for any worker count. NEUROHD_THREADS caps the pool.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace neurohd {

inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("NEUROHD_THREADS")) {
        const long v = std::atol(env);
        if (v > 0 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

// fn(begin, end) over [0, n) split into at most `threads` contiguous ranges.
template <typename F>
void parallel_ranges(std::size_t n, F&& fn, unsigned threads = 0) {
    if (threads == 0) threads = worker_count();
    if (threads <= 1 || n < 2) {
        fn(static_cast<std::size_t>(0), n);
        return;
    }
    if (threads > n) threads = static_cast<unsigned>(n);
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    std::size_t begin = chunk;
    for (unsigned t = 1; t < threads && begin < n; ++t, begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(static_cast<std::size_t>(0), std::min(n, chunk));
    for (auto& th : pool) th.join();
}

}  // namespace neurohd
