#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace aad {

// Runs fn(0..n_units) on up to `jobs` threads. Units must be independent;
// callers index into preallocated result slots so the merged output is
// identical to a serial run. jobs <= 1 executes inline.
inline void run_parallel(int n_units, int jobs, const std::function<void(int)>& fn) {
    if (n_units <= 0) return;
    if (jobs <= 1 || n_units == 1) {
        for (int i = 0; i < n_units; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const int i = next.fetch_add(1);
            if (i >= n_units) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    const int n_threads = std::min(jobs, n_units);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace aad
