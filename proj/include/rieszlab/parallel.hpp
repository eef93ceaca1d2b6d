#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rieszlab {

// Global worker count. 0 = auto (hardware_concurrency). Set from CLI --threads
// or the RIESZLAB_THREADS environment variable.
inline std::atomic<int>& thread_count() {
    static std::atomic<int> n{0};
    return n;
}

inline int resolved_thread_count() {
    int n = thread_count().load();
    if (n > 0) return n;
    if (const char* env = std::getenv("RIESZLAB_THREADS")) {
        int e = std::atoi(env);
        if (e > 0) return e;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Chunked parallel loop over [0, n). Each index is visited exactly once; the
// work function must write only to its own slots so results stay deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int nt = std::min<std::size_t>(resolved_thread_count(), n == 0 ? 1 : n);
    if (nt <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rieszlab
