#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ideoscale {

// Static block partition of [0, n) across up to `threads` workers.
// Workers own disjoint output ranges, so results do not depend on the
// thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    std::size_t nthreads = threads <= 1 ? 1 : static_cast<std::size_t>(threads);
    nthreads = std::min(nthreads, n);
    if (nthreads == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

inline int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace ideoscale
