#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace anypath {

/// Runs fn(0..count-1) across at most `jobs` workers. Each index must write
/// only its own output slot, so results never depend on the schedule.
inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0)
        return;
    if (jobs <= 1 || count == 1) {
        for (std::size_t k = 0; k < count; ++k)
            fn(k);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(jobs, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1))
                fn(k);
        });
    }
    for (std::thread& t : pool)
        t.join();
}

}  // namespace anypath
