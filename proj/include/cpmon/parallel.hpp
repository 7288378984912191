#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cpmon {

/// Worker count from CPMON_THREADS, else the hardware concurrency (>= 1).
unsigned default_thread_count();

/// Calls fn(worker, begin, end) on contiguous index blocks covering [0, n).
/// Block boundaries depend only on n and `threads`; callers that write
/// results by index get output independent of scheduling. The first
/// exception thrown by any worker is rethrown.
template <class Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = n * w / workers;
            const std::size_t end = n * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end] {
                try {
                    fn(w, begin, end);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace cpmon
