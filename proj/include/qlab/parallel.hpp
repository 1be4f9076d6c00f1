// Deterministic parallel-for over node ranges. Work is split into fixed-size
// chunks independent of the thread count, so reductions that combine chunk
// results in chunk order give bit-identical answers for any QLAB_THREADS.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qlab {

inline int hardware_threads() {
    static const int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("QLAB_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1 && cap < hw) hw = cap;
        }
        return hw;
    }();
    return n;
}

// fn(begin, end) is applied to half-open chunk ranges of [0, n).
inline void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    constexpr std::size_t chunk = 4096;
    const int threads = hardware_threads();
    if (threads == 1 || n <= chunk) {
        for (std::size_t b = 0; b < n; b += chunk) fn(b, std::min(n, b + chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(chunk);
            if (b >= n) return;
            fn(b, std::min(n, b + chunk));
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// Elementwise parallel map: fn(i) for i in [0, n).
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

// Deterministic sum of fn(i): chunk partials accumulated in chunk order.
template <class F>
double parallel_sum(std::size_t n, F&& fn) {
    constexpr std::size_t chunk = 4096;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double s = 0;
        for (std::size_t i = b; i < e; ++i) s += fn(i);
        partial[b / chunk] = s;
    });
    double total = 0;
    for (double p : partial) total += p;
    return total;
}

// Deterministic max of fn(i) (returns 0 for empty ranges).
template <class F>
double parallel_max(std::size_t n, F&& fn) {
    constexpr std::size_t chunk = 4096;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double s = 0;
        for (std::size_t i = b; i < e; ++i) s = std::max(s, fn(i));
        partial[b / chunk] = s;
    });
    double total = 0;
    for (double p : partial) total = std::max(total, p);
    return total;
}

}  // namespace qlab
