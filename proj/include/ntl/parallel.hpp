#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ntl::detail {

// Runs fn(0..n_jobs) across at most `workers` threads. Jobs must write only
// to their own output slots; completion order is irrelevant to callers, which
// keeps results identical for any worker count.
inline void run_partitioned(std::size_t n_jobs, int workers,
                            const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n_jobs <= 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) fn(i);
        return;
    }
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n_jobs);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::atomic<std::size_t> cursor{0};
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= n_jobs) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ntl::detail
