#include "spikekern/jitconn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spikekern/log.hpp"
#include "scatter.hpp"

namespace spikekern {

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(master ^ mix64(h + index * kGolden));
}

std::uint64_t gap_bound(double prob)
{
    if (!(prob > 0.0 && prob <= 1.0)) throw ValidationError("jitconn prob must be in (0, 1], got " + std::to_string(prob));
    // The epsilon absorbs binary rounding of p (2/0.1 - 1 must give 19).
    const double k = std::floor(2.0 / prob - 1.0 + 1e-9);
    if (k < 1.0) return 1;
    return static_cast<std::uint64_t>(k);
}

void JitConnSpec::validate() const
{
    if (!(prob > 0.0 && prob <= 1.0)) throw ValidationError("jitconn prob must be in (0, 1], got " + std::to_string(prob));
    std::visit(
        [](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, UniformDist>) {
                if (!(d.w_low <= d.w_high)) throw ValidationError("uniform weight needs w_low <= w_high");
            } else if constexpr (std::is_same_v<D, NormalDist>) {
                if (!(d.w_sigma >= 0)) throw ValidationError("normal weight needs w_sigma >= 0");
            }
        },
        dist);
}

std::uint64_t JitConnSpec::gap_bound() const
{
    return spikekern::gap_bound(prob);
}

double JitConnSpec::effective_prob() const
{
    return 2.0 / (static_cast<double>(gap_bound()) + 1.0);
}

unsigned JitConnSpec::weight_words() const
{
    return std::visit([](const auto& d) { return detail::words_of<std::decay_t<decltype(d)>>(); }, dist);
}

JitConnSpec make_jitconn_spec(Index n_rows, Index n_cols, double prob, WeightDist dist, std::uint64_t seed)
{
    JitConnSpec spec{n_rows, n_cols, prob, dist, seed};
    spec.validate();
    if (prob > 0.5 && prob < 1.0) {
        warn("jitconn prob " + std::to_string(prob) + " > 0.5 gives gap bound 1: the matrix is fully connected");
    }
    return spec;
}

std::vector<Target> row_targets(const JitConnSpec& spec, Index row)
{
    spec.validate();
    if (row >= spec.n_rows) throw DimensionError("row " + std::to_string(row) + " out of range");
    std::vector<Target> out;
    for_each_target(spec, row, [&](Index c, Real w) { out.push_back({c, w}); });
    return out;
}

double expected_nnz(const JitConnSpec& spec)
{
    return static_cast<double>(spec.n_rows) * static_cast<double>(spec.n_cols) * spec.effective_prob();
}

CsrMatrix materialize(const JitConnSpec& spec, std::uint64_t max_nnz)
{
    spec.validate();
    if (expected_nnz(spec) > static_cast<double>(max_nnz)) {
        throw SizeGuardError("materialize: expected nnz " + std::to_string(expected_nnz(spec)) + " exceeds guard " +
                             std::to_string(max_nnz));
    }
    const bool homo = std::holds_alternative<HomoDist>(spec.dist);
    std::vector<Index> indptr(std::size_t{spec.n_rows} + 1, 0);
    std::vector<Index> indices;
    std::vector<Real> weights;
    indices.reserve(static_cast<std::size_t>(expected_nnz(spec) * 1.05) + 16);
    if (!homo) weights.reserve(indices.capacity());
    for (Index r = 0; r < spec.n_rows; ++r) {
        for_each_target(spec, r, [&](Index c, Real w) {
            indices.push_back(c);
            if (!homo) weights.push_back(w);
        });
        if (indices.size() > std::numeric_limits<Index>::max()) throw SizeGuardError("materialize: nnz overflows u32");
        indptr[r + 1] = static_cast<Index>(indices.size());
    }
    CsrWeights w = homo ? CsrWeights{HomogeneousWeight{std::get<HomoDist>(spec.dist).w}} : CsrWeights{std::move(weights)};
    return CsrMatrix(spec.n_rows, spec.n_cols, std::move(indptr), std::move(indices), std::move(w));
}

namespace {

void check_dims(const JitConnSpec& spec, std::size_t in_len, std::size_t out_len, bool transpose, const char* what)
{
    spec.validate();
    require_same_size(in_len, transpose ? spec.n_rows : spec.n_cols, what);
    require_same_size(out_len, transpose ? spec.n_cols : spec.n_rows, "output");
}


}  // namespace

void jitconn_matvec_into(const JitConnSpec& spec, std::span<const Real> v, bool transpose, std::span<Real> out,
                         Exec exec)
{
    check_dims(spec, v.size(), out.size(), transpose, "jitconn_matvec input");
    if (transpose) {
        detail::scatter_exec(spec.n_rows, out, exec, [&](std::size_t b, std::size_t e, Real* dst, unsigned) {
            for (std::size_t i = b; i < e; ++i) {
                const Real vi = v[i];
                for_each_target(spec, static_cast<Index>(i), [&](Index c, Real w) { dst[c] += w * vi; });
            }
        });
        return;
    }
    parallel_blocks(spec.n_rows, exec.threads, [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t i = b; i < e; ++i) {
            Real acc = 0;
            for_each_target(spec, static_cast<Index>(i), [&](Index c, Real w) { acc += w * v[c]; });
            out[i] = acc;
        }
    });
}

std::vector<Real> jitconn_matvec(const JitConnSpec& spec, std::span<const Real> v, bool transpose, Exec exec)
{
    std::vector<Real> out(transpose ? spec.n_cols : spec.n_rows);
    jitconn_matvec_into(spec, v, transpose, out, exec);
    return out;
}

void jitconn_event_matvec_into(const JitConnSpec& spec, const SpikeVector& events, bool transpose,
                               std::span<Real> out, Exec exec, KernelStats* stats)
{
    check_dims(spec, events.size(), out.size(), transpose, "jitconn_event_matvec events");
    const std::uint8_t* bits = events.bits().data();
    const bool counts_draws = spec.weight_words() > 0;
    std::vector<std::uint64_t> drawn(std::max(1u, exec.threads), 0);
    if (transpose) {
        detail::scatter_exec(spec.n_rows, out, exec, [&](std::size_t b, std::size_t e, Real* dst, unsigned w) {
            std::uint64_t n = 0;
            for (std::size_t i = b; i < e; ++i) {
                if (!bits[i]) continue;
                for_each_target(spec, static_cast<Index>(i), [&](Index c, Real wt) {
                    dst[c] += wt;
                    ++n;
                });
            }
            drawn[w] += n;
        });
    } else {
        parallel_blocks(spec.n_rows, exec.threads, [&](std::size_t b, std::size_t e, unsigned w) {
            std::uint64_t n = 0;
            for (std::size_t i = b; i < e; ++i) {
                Real acc = 0;
                for_each_target_lazy(
                    spec, static_cast<Index>(i), [&](Index c) { return bits[c] != 0; },
                    [&](Index, Real wt) {
                        acc += wt;
                        ++n;
                    });
                out[i] = acc;
            }
            drawn[w] += n;
        });
    }
    if (stats && counts_draws) {
        for (auto n : drawn) stats->weight_draws += n;
    }
}

std::vector<Real> jitconn_event_matvec(const JitConnSpec& spec, const SpikeVector& events, bool transpose, Exec exec,
                                       KernelStats* stats)
{
    std::vector<Real> out(transpose ? spec.n_cols : spec.n_rows);
    jitconn_event_matvec_into(spec, events, transpose, out, exec, stats);
    return out;
}

std::uint64_t jitconn_geometric_gap(double p, double u)
{
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("geometric gap needs 0 < p < 1, got " + std::to_string(p));
    if (!(u > 0.0 && u < 1.0)) throw ValidationError("geometric gap needs 0 < u < 1");
    const double g = std::ceil(std::log(u) / std::log1p(-p));
    return g < 1.0 ? 1 : static_cast<std::uint64_t>(g);
}

}  // namespace spikekern
