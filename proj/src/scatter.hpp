#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "spikekern/exec.hpp"
#include "spikekern/types.hpp"

namespace spikekern::detail {

// Runs body(begin, end, dst, worker) over row blocks. Sequentially it writes
// into `out` directly; in parallel each worker scatters into a private buffer
// and the buffers are summed in worker order.
template <class Body>
void scatter_exec(std::size_t n_rows, std::span<Real> out, Exec exec, Body&& body)
{
    std::fill(out.begin(), out.end(), Real{0});
    if (!exec.parallel()) {
        body(std::size_t{0}, n_rows, out.data(), 0u);
        return;
    }
    std::vector<std::vector<Real>> priv(exec.threads, std::vector<Real>(out.size(), Real{0}));
    parallel_blocks(n_rows, exec.threads,
                    [&](std::size_t b, std::size_t e, unsigned w) { body(b, e, priv[w].data(), w); });
    for (const auto& p : priv)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += p[k];
}

}  // namespace spikekern::detail
