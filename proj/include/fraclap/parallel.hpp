#pragma once

// Minimal fork-join helper. Work is split into contiguous blocks, one per
// worker, so results written to per-index slots are deterministic for any
// thread count.

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fraclap {

inline std::atomic<unsigned>& max_threads_ref()
{
    static std::atomic<unsigned> value{0}; // 0 = use hardware concurrency
    return value;
}

inline void set_max_threads(unsigned n) { max_threads_ref().store(n); }

inline unsigned effective_threads(std::size_t work_items)
{
    unsigned n = max_threads_ref().load();
    if (n == 0) n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (work_items < n) n = static_cast<unsigned>(work_items > 0 ? work_items : 1);
    return n;
}

// body(begin, end) is invoked on disjoint blocks covering [0, n).
template <class Body>
void parallel_blocks(std::size_t n, Body&& body)
{
    if (n == 0) return;
    const unsigned workers = effective_threads(n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&](std::size_t lo, std::size_t hi) {
        try {
            body(lo, hi);
        } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
        }
    };
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 1; t < workers; ++t) {
        const std::size_t lo = t * chunk;
        if (lo >= n) break;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back(run, lo, hi);
    }
    run(0, std::min(chunk, n));
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// body(i) per index.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    parallel_blocks(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
    });
}

} // namespace fraclap
