#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace grn {

/// Hardware parallelism with a sane floor.
inline std::size_t default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Runs f(i) for i in [0, n) across `workers` threads with a static block
/// partition. f must be pure per index (results keyed by i), which makes the
/// outcome independent of the worker count and the schedule.
template <typename F>
void parallel_for_indexed(std::size_t n, std::size_t workers, F&& f) {
    if (n == 0)
        return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    const std::size_t w = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = n * t / w;
        const std::size_t hi = n * (t + 1) / w;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i)
                f(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

} // namespace grn
