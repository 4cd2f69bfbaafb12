#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace spikekern {

/// Execution policy for kernels. threads == 1 is the deterministic sequential mode.
struct Exec {
    unsigned threads = 1;

    bool parallel() const { return threads > 1; }
};

/// Splits [0, n) into contiguous blocks and runs fn(begin, end, worker) on each.
template <class Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn)
{
    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
    if (workers <= 1) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 1; w < workers; ++w) {
        const std::size_t b = std::min(n, w * chunk);
        const std::size_t e = std::min(n, b + chunk);
        pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
    }
    fn(std::size_t{0}, std::min(n, chunk), 0u);
    for (auto& t : pool) t.join();
}

}  // namespace spikekern
