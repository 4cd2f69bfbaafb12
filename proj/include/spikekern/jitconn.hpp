#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "spikekern/counter_rng.hpp"
#include "spikekern/csr.hpp"
#include "spikekern/exec.hpp"
#include "spikekern/sparse_kernels.hpp"
#include "spikekern/spike_vector.hpp"

namespace spikekern {

struct HomoDist {
    Real w = 1;
    bool operator==(const HomoDist&) const = default;
};
struct UniformDist {
    Real w_low = 0;
    Real w_high = 1;
    bool operator==(const UniformDist&) const = default;
};
struct NormalDist {
    Real w_mu = 0;
    Real w_sigma = 1;
    bool operator==(const NormalDist&) const = default;
};
using WeightDist = std::variant<HomoDist, UniformDist, NormalDist>;

/// Procedural fixed-probability matrix. The fields are the whole persistent
/// state; edges are regenerated from (seed, row) on every use.
///
/// Row r's targets are a renewal process: the first target is g0 - 1 and each
/// following target adds g_k, with g_k ~ U[1, K], K = max(1, floor(2/p - 1)).
/// A target's weight is drawn right after its gap from the same row stream.
/// The realized density is p_eff = 2 / (K + 1), which equals p only when
/// 2/p - 1 is an integer.
struct JitConnSpec {
    Index n_rows = 0;
    Index n_cols = 0;
    double prob = 1.0;
    WeightDist dist = HomoDist{};
    std::uint64_t seed = 0;

    void validate() const;
    std::uint64_t gap_bound() const;
    double effective_prob() const;
    /// Words consumed per target for the weight draw (0, 1 or 2).
    unsigned weight_words() const;

    /// Exact bytes of persistent operator state, independent of shape.
    static constexpr std::size_t state_bytes()
    {
        return 2 * sizeof(Index) + sizeof(double) + 1 + 2 * sizeof(Real) + sizeof(std::uint64_t);
    }

    bool operator==(const JitConnSpec&) const = default;
};

/// Validates and warns once when prob > 0.5 makes the matrix dense (p_eff = 1 != p).
JitConnSpec make_jitconn_spec(Index n_rows, Index n_cols, double prob, WeightDist dist, std::uint64_t seed);

std::uint64_t gap_bound(double prob);

struct Target {
    Index col;
    Real weight;
    bool operator==(const Target&) const = default;
};

namespace detail {

template <class D>
Real draw_weight(const D& d, RowSampler& s)
{
    if constexpr (std::is_same_v<D, HomoDist>) {
        return d.w;
    } else if constexpr (std::is_same_v<D, UniformDist>) {
        return static_cast<Real>(s.uniform(d.w_low, d.w_high));
    } else {
        return static_cast<Real>(s.normal(d.w_mu, d.w_sigma));
    }
}

template <class D>
constexpr unsigned words_of()
{
    if constexpr (std::is_same_v<D, HomoDist>) return 0;
    else if constexpr (std::is_same_v<D, UniformDist>) return 1;
    else return 2;
}

}  // namespace detail

/// Calls fn(col, weight) for each target of `row`, in increasing column order.
template <class Fn>
void for_each_target(const JitConnSpec& spec, Index row, Fn&& fn)
{
    const std::uint64_t k = spec.gap_bound();
    std::visit(
        [&](const auto& d) {
            RowSampler s(spec.seed, row);
            std::uint64_t col = s.uniform_int(k) - 1;
            while (col < spec.n_cols) {
                fn(static_cast<Index>(col), detail::draw_weight(d, s));
                col += s.uniform_int(k);
            }
        },
        spec.dist);
}

/// Like for_each_target, but only targets with wanted(col) reach sink(col, weight).
/// Weights of the other targets are skipped by advancing the counter, not drawn.
template <class Wanted, class Sink>
void for_each_target_lazy(const JitConnSpec& spec, Index row, Wanted&& wanted, Sink&& sink)
{
    const std::uint64_t k = spec.gap_bound();
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            RowSampler s(spec.seed, row);
            std::uint64_t col = s.uniform_int(k) - 1;
            while (col < spec.n_cols) {
                const auto c = static_cast<Index>(col);
                if (wanted(c)) sink(c, detail::draw_weight(d, s));
                else s.skip(detail::words_of<D>());
                col += s.uniform_int(k);
            }
        },
        spec.dist);
}

/// Materialized target stream of one row.
std::vector<Target> row_targets(const JitConnSpec& spec, Index row);

/// Testing oracle: the implied matrix as CSR. Throws SizeGuardError when the
/// expected nnz exceeds max_nnz.
CsrMatrix materialize(const JitConnSpec& spec, std::uint64_t max_nnz = 100'000'000);

/// Expected nnz of the implied matrix (n_rows * n_cols * p_eff).
double expected_nnz(const JitConnSpec& spec);

/// y = J v (gather over rows) or y = J^T v (rows regenerated and scattered).
std::vector<Real> jitconn_matvec(const JitConnSpec& spec, std::span<const Real> v, bool transpose, Exec exec = {});
void jitconn_matvec_into(const JitConnSpec& spec, std::span<const Real> v, bool transpose, std::span<Real> out,
                         Exec exec = {});

/// Event-driven JIT product. transpose = true regenerates only active rows;
/// transpose = false regenerates every row but draws weights only for active columns.
std::vector<Real> jitconn_event_matvec(const JitConnSpec& spec, const SpikeVector& events, bool transpose,
                                       Exec exec = {}, KernelStats* stats = nullptr);
void jitconn_event_matvec_into(const JitConnSpec& spec, const SpikeVector& events, bool transpose,
                               std::span<Real> out, Exec exec = {}, KernelStats* stats = nullptr);

/// ceil(log(u) / log(1 - p)), at least 1. Inverse-CDF geometric gap, kept for
/// the sampler benchmark.
std::uint64_t jitconn_geometric_gap(double p, double u);

}  // namespace spikekern
