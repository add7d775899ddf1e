#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace afp {

/// Worker count: explicit request, else AFP_JOBS, else hardware concurrency.
inline unsigned resolve_jobs(unsigned requested = 0) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("AFP_JOBS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Run fn(i) for i in [0, n). Each index is processed exactly once and writes
/// only its own outputs, so results are independent of the worker count. The
/// first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::size_t n, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
    jobs = resolve_jobs(jobs);
    if (n == 0) {
        return;
    }
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> threads;
    const unsigned count = static_cast<unsigned>(
        std::min<std::size_t>(jobs, n));
    threads.reserve(count);
    for (unsigned t = 0; t < count; ++t) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace afp
