#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vantage {

/// Strided parallel loop: worker t handles i = t, t + jobs, ... Each index
/// must write only to its own output slot, so results are identical for any
/// worker count. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (n == 0) return;
    const auto workers = static_cast<std::size_t>(jobs < 1 ? 1 : jobs);
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    const std::size_t spawn = workers < n ? workers : n;
    threads.reserve(spawn);
    for (std::size_t t = 0; t < spawn; ++t) {
        threads.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += spawn) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vantage
