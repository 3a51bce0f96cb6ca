#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace crocs {

/// Process-wide worker count used by parallel_for when callers pass 0.
inline std::size_t& default_thread_count() {
    static std::size_t count = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return count;
}

namespace detail {
inline bool& inside_parallel_worker() {
    thread_local bool inside = false;
    return inside;
}
}  // namespace detail

/// Runs fn(i) for i in [0, n). Each index owns its output slot, so results are
/// identical for any thread count; only wall time changes. Nested calls run
/// sequentially instead of spawning more threads. Exceptions from workers are
/// rethrown (first one wins).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t threads = 0) {
    if (threads == 0) threads = default_thread_count();
    threads = std::min(threads, n);
    if (threads <= 1 || detail::inside_parallel_worker()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = std::max<std::size_t>(1, n / (threads * 8));

    auto worker = [&] {
        detail::inside_parallel_worker() = true;
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                break;
            }
        }
        detail::inside_parallel_worker() = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace crocs
