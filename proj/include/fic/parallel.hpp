#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fic {

// Process-wide worker cap.  1 means run everything on the calling thread.
inline std::size_t& max_threads_slot() {
    static std::size_t n = 1;
    return n;
}

inline void set_max_threads(std::size_t n) { max_threads_slot() = n == 0 ? 1 : n; }

inline std::size_t max_threads() { return max_threads_slot(); }

// Runs fn(i) for i in [0, n).  Work is claimed index by index off a shared
// counter, so results must be written into caller-owned slots addressed by i;
// any reduction over them afterwards is then independent of the schedule.
// The first exception wins and is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_lock;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> hold(error_lock);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace fic
