#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace finsler {

/// Worker count for fiber/sample sweeps; FINSLERLAB_THREADS overrides, the
/// default is sequential. Results are always written by index and reduced in
/// a fixed order, so the thread count never changes any output byte.
inline int thread_count() {
    static const int n = [] {
        if (const char* env = std::getenv("FINSLERLAB_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1 && v <= 256) return v;
        }
        return 1;
    }();
    return n;
}

template <class Fn>
void parallel_for(int count, Fn&& fn) {
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace finsler
