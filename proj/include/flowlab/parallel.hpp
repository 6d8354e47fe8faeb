#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace flowlab {

// Worker count: min(hardware_concurrency, 8), capped by FLOWLAB_THREADS.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (n > 8) n = 8;
    if (const char* env = std::getenv("FLOWLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

// Runs body(i) for i in [0, count).  Work is claimed from a shared counter;
// callers that need determinism must write results indexed by i and reduce
// sequentially afterwards.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const int workers = worker_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    const int spawn = std::min<std::size_t>(workers, count) - 1;
    pool.reserve(spawn);
    for (int w = 0; w < spawn; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

} // namespace flowlab
