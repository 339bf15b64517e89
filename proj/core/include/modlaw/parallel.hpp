#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace modlaw {

/// Runs body(i) for i in [0, count) on `workers` threads. Tasks are claimed
/// dynamically, so callers must write results into per-index slots and
/// reduce them in index order afterwards; that keeps outputs identical for
/// any worker count.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body)
{
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        try {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next.store(count);
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawned = static_cast<unsigned>(std::min<std::size_t>(workers, count)) - 1;
    pool.reserve(spawned);
    for (unsigned t = 0; t < spawned; ++t)
        pool.emplace_back(run);
    run();
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace modlaw
