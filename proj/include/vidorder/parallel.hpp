#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace vidorder {

/// Worker cap: the VIDORDER_THREADS environment variable when set (minimum
/// 1), otherwise the hardware concurrency.
inline unsigned max_threads() {
    if (const char* s = std::getenv("VIDORDER_THREADS")) {
        const long v = std::strtol(s, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
        return 1;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

/// Index-parallel loop. `f(i)` must only touch slot i of shared state so the
/// result is identical to the serial run regardless of the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(max_threads(), n ? n : 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace vidorder
