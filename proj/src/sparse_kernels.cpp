#include "spikekern/sparse_kernels.hpp"

#include <algorithm>

#include "scatter.hpp"

namespace spikekern {

namespace {

// Weight accessors let each kernel be written once and instantiated for the
// homogeneous scalar and the per-edge array.
struct HomoAccess {
    Real w;
    Real operator()(std::size_t) const { return w; }
};

struct EdgeAccess {
    const Real* w;
    Real operator()(std::size_t j) const { return w[j]; }
};

template <class Fn>
decltype(auto) with_weights(const CsrMatrix& m, Fn&& fn)
{
    if (m.is_homogeneous()) return fn(HomoAccess{m.homogeneous_weight()});
    return fn(EdgeAccess{m.edge_weights().data()});
}

void check_input(const CsrMatrix& m, std::size_t in_len, std::size_t out_len, bool transpose, const char* what)
{
    require_same_size(in_len, transpose ? m.n_rows() : m.n_cols(), what);
    require_same_size(out_len, transpose ? m.n_cols() : m.n_rows(), "output");
}

// Scatter over rows [b, e): out[indices[j]] += w_j * x(i).
template <class W, class X>
void scatter_rows(const CsrMatrix& m, W weight, X x, std::size_t b, std::size_t e, Real* out)
{
    const Index* indptr = m.indptr().data();
    const Index* indices = m.indices().data();
    for (std::size_t i = b; i < e; ++i) {
        const Real xi = x(i);
        for (Index j = indptr[i]; j < indptr[i + 1]; ++j) out[indices[j]] += weight(j) * xi;
    }
}

}  // namespace

void dense_matvec_into(const DenseMatrix& m, std::span<const Real> v, bool transpose, std::span<Real> out)
{
    require_same_size(v.size(), transpose ? m.rows() : m.cols(), "dense_matvec input");
    require_same_size(out.size(), transpose ? m.cols() : m.rows(), "dense_matvec output");
    if (!transpose) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const auto row = m.row(i);
            Real acc = 0;
            for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
            out[i] = acc;
        }
        return;
    }
    std::fill(out.begin(), out.end(), Real{0});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const Real vi = v[i];
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j] * vi;
    }
}

std::vector<Real> dense_matvec(const DenseMatrix& m, std::span<const Real> v, bool transpose)
{
    std::vector<Real> out(transpose ? m.cols() : m.rows());
    dense_matvec_into(m, v, transpose, out);
    return out;
}

void csrmv_into(const CsrMatrix& m, std::span<const Real> v, bool transpose, std::span<Real> out, Exec exec)
{
    check_input(m, v.size(), out.size(), transpose, "csrmv input");
    with_weights(m, [&](auto weight) {
        if (transpose) {
            detail::scatter_exec(m.n_rows(), out, exec, [&](std::size_t b, std::size_t e, Real* dst, unsigned) {
                scatter_rows(m, weight, [&](std::size_t i) { return v[i]; }, b, e, dst);
            });
            return;
        }
        const Index* indptr = m.indptr().data();
        const Index* indices = m.indices().data();
        parallel_blocks(m.n_rows(), exec.threads, [&](std::size_t b, std::size_t e, unsigned) {
            for (std::size_t i = b; i < e; ++i) {
                Real acc = 0;
                for (Index j = indptr[i]; j < indptr[i + 1]; ++j) acc += weight(j) * v[indices[j]];
                out[i] = acc;
            }
        });
    });
}

std::vector<Real> csrmv(const CsrMatrix& m, std::span<const Real> v, bool transpose, Exec exec)
{
    std::vector<Real> out(transpose ? m.n_cols() : m.n_rows());
    csrmv_into(m, v, transpose, out, exec);
    return out;
}

void event_csrmv_into(const CsrMatrix& m, const SpikeVector& events, bool transpose, std::span<Real> out, Exec exec,
                      KernelStats* stats)
{
    check_input(m, events.size(), out.size(), transpose, "event_csrmv events");
    const std::uint8_t* bits = events.bits().data();
    const Index* indptr = m.indptr().data();
    const Index* indices = m.indices().data();
    std::vector<std::uint64_t> reads(std::max(1u, exec.threads), 0);

    with_weights(m, [&](auto weight) {
        if (transpose) {
            detail::scatter_exec(m.n_rows(), out, exec, [&](std::size_t b, std::size_t e, Real* dst, unsigned w) {
                std::uint64_t n = 0;
                for (std::size_t i = b; i < e; ++i) {
                    if (!bits[i]) continue;
                    for (Index j = indptr[i]; j < indptr[i + 1]; ++j) dst[indices[j]] += weight(j);
                    n += indptr[i + 1] - indptr[i];
                }
                reads[w] += n;
            });
            return;
        }
        parallel_blocks(m.n_rows(), exec.threads, [&](std::size_t b, std::size_t e, unsigned w) {
            std::uint64_t n = 0;
            for (std::size_t i = b; i < e; ++i) {
                Real acc = 0;
                for (Index j = indptr[i]; j < indptr[i + 1]; ++j) {
                    if (bits[indices[j]]) {
                        acc += weight(j);
                        ++n;
                    }
                }
                out[i] = acc;
            }
            reads[w] += n;
        });
    });
    if (stats) {
        for (auto n : reads) stats->weight_reads += n;
    }
}

std::vector<Real> event_csrmv(const CsrMatrix& m, const SpikeVector& events, bool transpose, Exec exec,
                              KernelStats* stats)
{
    std::vector<Real> out(transpose ? m.n_cols() : m.n_rows());
    event_csrmv_into(m, events, transpose, out, exec, stats);
    return out;
}

WeightGrad event_csrmv_weight_grad(const CsrMatrix& m, const SpikeVector& events, std::span<const Real> cotangent,
                                   bool transpose)
{
    require_same_size(events.size(), transpose ? m.n_rows() : m.n_cols(), "event_csrmv_weight_grad events");
    require_same_size(cotangent.size(), transpose ? m.n_cols() : m.n_rows(), "event_csrmv_weight_grad cotangent");
    std::vector<Real> grad(m.nnz(), Real{0});
    const auto indptr = m.indptr();
    const auto indices = m.indices();
    for (Index i = 0; i < m.n_rows(); ++i) {
        for (Index j = indptr[i]; j < indptr[i + 1]; ++j) {
            // Edge j runs from its source (event side) to its target (output side).
            const bool active = transpose ? events[i] : events[indices[j]];
            const Real ct = transpose ? cotangent[indices[j]] : cotangent[i];
            grad[j] = active ? ct : Real{0};
        }
    }
    if (!m.is_homogeneous()) return grad;
    Real total = 0;
    for (Real g : grad) total += g;
    return total;
}

}  // namespace spikekern
