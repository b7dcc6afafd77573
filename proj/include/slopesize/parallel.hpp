#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slopesize {

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(begin, end) over contiguous chunks of [0, count). Bodies must
// write results by index; the chunking never changes what gets computed.
template <typename Body>
void parallel_chunks(std::int64_t count, unsigned workers, Body&& body) {
    if (count <= 0) return;
    const auto n_workers =
        static_cast<std::int64_t>(std::min<std::int64_t>(resolve_workers(workers), count));
    if (n_workers <= 1) {
        body(std::int64_t{0}, count);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (std::int64_t w = 0; w < n_workers; ++w) {
            const std::int64_t begin = count * w / n_workers;
            const std::int64_t end = count * (w + 1) / n_workers;
            threads.emplace_back([&, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace slopesize
