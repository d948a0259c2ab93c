#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace sdecv {

/// Paths are processed in fixed-size blocks; results depend on the block
/// partition only, never on the number of worker threads.
inline constexpr std::int64_t kPathBlock = 1024;

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::int64_t block_count(std::int64_t paths) { return (paths + kPathBlock - 1) / kPathBlock; }

/// Calls work(block) for every block and feeds the results to merge() in
/// block order. Blocks run in waves of `threads` concurrent workers.
template <class Work, class Merge>
void for_each_block_ordered(std::int64_t blocks, int threads, Work&& work, Merge&& merge) {
    threads = resolve_threads(threads);
    if (threads == 1 || blocks <= 1) {
        for (std::int64_t b = 0; b < blocks; ++b) merge(work(b));
        return;
    }
    using Result = decltype(work(std::int64_t{0}));
    for (std::int64_t start = 0; start < blocks; start += threads) {
        const std::int64_t wave = std::min<std::int64_t>(threads, blocks - start);
        std::vector<std::optional<Result>> results(static_cast<std::size_t>(wave));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(wave));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(wave));
        for (std::int64_t i = 0; i < wave; ++i) {
            pool.emplace_back([&, i] {
                try {
                    results[i].emplace(work(start + i));
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (auto& r : results) merge(std::move(*r));
    }
}

}  // namespace sdecv
