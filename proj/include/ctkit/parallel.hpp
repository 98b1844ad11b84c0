#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ctkit {

namespace detail {

inline std::atomic<unsigned>& thread_cap() {
    static std::atomic<unsigned> cap{0}; // 0 = unresolved
    return cap;
}

inline unsigned default_threads() {
    if (const char* env = std::getenv("CTKIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

} // namespace detail

/// Cap worker parallelism; 0 restores the default (CTKIT_THREADS env var,
/// else hardware concurrency).
inline void set_max_threads(unsigned n) {
    detail::thread_cap().store(n == 0 ? detail::default_threads() : n);
}

inline unsigned max_threads() {
    unsigned cap = detail::thread_cap().load();
    if (cap == 0) {
        cap = detail::default_threads();
        detail::thread_cap().store(cap);
    }
    return cap;
}

/// Run fn(i) for i in [0, n). Every index is computed by exactly one worker
/// and workers write disjoint outputs, so results do not depend on the
/// thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned nt = std::min<std::size_t>(max_threads(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

} // namespace ctkit
