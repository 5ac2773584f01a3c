#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace jano {

namespace detail {
inline thread_local uint32_t forced_workers = 0;
}

/// JANO_WORKERS overrides hardware concurrency (capped at 16 by default);
/// a WorkerGuard on the calling thread overrides both.
inline uint32_t worker_count() {
    if (detail::forced_workers > 0) return detail::forced_workers;
    if (const char* env = std::getenv("JANO_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<uint32_t>(std::min<long>(n, 256));
    }
    const uint32_t hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min<uint32_t>(hw, 16);
}

/// Scoped worker-count override for the current thread; lets callers that
/// parallelize at a coarser grain run nested parallel_for calls serially.
class WorkerGuard {
public:
    explicit WorkerGuard(uint32_t workers) : prev_(detail::forced_workers) {
        detail::forced_workers = workers;
    }
    ~WorkerGuard() { detail::forced_workers = prev_; }
    WorkerGuard(const WorkerGuard&) = delete;
    WorkerGuard& operator=(const WorkerGuard&) = delete;

private:
    uint32_t prev_;
};

/// Contiguous range split over [0, n): fn(begin, end, worker_index).
/// Per-index work must be independent; outputs are then identical for any
/// worker count.
inline void parallel_for(size_t n, const std::function<void(size_t, size_t, uint32_t)>& fn,
                         uint32_t workers = 0) {
    if (workers == 0) workers = worker_count();
    if (n == 0) return;
    workers = static_cast<uint32_t>(std::min<size_t>(workers, n));
    if (workers <= 1) {
        fn(0, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mu;
    const size_t chunk = (n + workers - 1) / workers;
    for (uint32_t w = 0; w < workers; ++w) {
        const size_t b = static_cast<size_t>(w) * chunk;
        const size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e, w] {
            try {
                fn(b, e, w);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace jano
