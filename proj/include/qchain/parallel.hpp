#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace qchain {

// Runs fn(i) for i in [0, count) on `threads` workers (0 = hardware
// concurrency). fn must confine itself to per-index state; results keyed by
// index stay deterministic regardless of scheduling.
inline void parallel_for(long long count, int threads, const std::function<void(long long)>& fn) {
    if (count <= 0) return;
    unsigned n_workers = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    if (n_workers <= 1 || count == 1) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) {
        pool.emplace_back([&] {
            for (long long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace qchain
