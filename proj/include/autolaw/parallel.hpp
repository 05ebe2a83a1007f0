#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace autolaw {

/// Runs fn(i) for i in [0, n) on up to max_workers threads. Results must be
/// written by index, so output order never depends on scheduling. The first
/// exception (by index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_workers, Fn&& fn) {
    const std::size_t workers = std::min(n, std::max<std::size_t>(1, max_workers));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    threads.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace autolaw
