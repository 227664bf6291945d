#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fkmc {

/// Runs fn(begin, end) over a chunked partition of [0, n).
///
/// Work items must write to disjoint slots; the partition depends only on
/// (n, threads), never on scheduling, so results are reproducible for any
/// thread count as long as fn itself is a pure function of its index range.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(threads, n);
    const std::size_t base = n / chunks;
    const std::size_t rem = n % chunks;

    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::exception_ptr first_error;
    std::mutex err_mutex;

    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t len = base + (c < rem ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&fn, begin, end, &first_error, &err_mutex] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fkmc
