#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace wormald {

/// Evaluates task(0), ..., task(count - 1), possibly on several threads,
/// and returns the results ordered by index. If any task throws, the
/// exception of the lowest failing index is rethrown after all workers stop.
template <class Task>
auto map_indexed(std::size_t count, Task&& task, std::size_t max_threads = 0)
    -> std::vector<std::invoke_result_t<Task&, std::size_t>>
{
    using Result = std::invoke_result_t<Task&, std::size_t>;
    std::vector<Result> results(count);
    std::vector<std::exception_ptr> failures(count);

    std::size_t threads = max_threads ? max_threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                results[i] = task(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back(worker);
    }

    for (auto& failure : failures)
        if (failure)
            std::rethrow_exception(failure);
    return results;
}

} // namespace wormald
