#pragma once

#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hjb {

// Process-wide worker count. Defaults to HJBOLZA_THREADS (or 1).
// Results never depend on it: parallel_for only splits index ranges
// whose iterations write to disjoint slots.
inline int& thread_count() {
    static int n = [] {
        if (const char* env = std::getenv("HJBOLZA_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return n;
}

inline void set_thread_count(int n) { thread_count() = n < 1 ? 1 : n; }

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = thread_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunks = static_cast<std::size_t>(workers);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace hjb
