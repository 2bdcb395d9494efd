#ifndef FEATSIG_PARALLEL_HPP
#define FEATSIG_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace featsig {

// Runs body(worker, index) for index in [0, count) across `workers`
// threads pulling indices from a shared counter.  The partition of indices
// onto threads varies between runs, so the body must write only to
// index-owned slots; callers rely on that for run-to-run determinism.
// The first exception thrown by any body is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t workers, std::size_t count, Body&& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(0, i);
        return;
    }
    if (workers > count) workers = count;

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto run = [&](std::size_t worker) {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) break;
            try {
                body(worker, i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run, w);
    run(0);
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace featsig

#endif  // FEATSIG_PARALLEL_HPP
