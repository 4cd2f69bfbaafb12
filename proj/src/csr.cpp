#include "spikekern/csr.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace spikekern {

namespace {

void check_shape_fits(std::size_t nnz)
{
    if (nnz > std::numeric_limits<Index>::max()) {
        throw SizeGuardError("CSR nnz " + std::to_string(nnz) + " exceeds u32 index range");
    }
}

}  // namespace

CsrMatrix::CsrMatrix(Index n_rows, Index n_cols, std::vector<Index> indptr, std::vector<Index> indices,
                     CsrWeights weights)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      indptr_(std::move(indptr)),
      indices_(std::move(indices)),
      weights_(std::move(weights))
{
    validate();
}

void CsrMatrix::validate() const
{
    if (indptr_.size() != std::size_t{n_rows_} + 1) {
        throw ValidationError("CSR indptr length " + std::to_string(indptr_.size()) + ", expected " +
                              std::to_string(std::size_t{n_rows_} + 1));
    }
    if (indptr_.front() != 0) throw ValidationError("CSR indptr[0] must be 0");
    if (indptr_.back() != indices_.size()) throw ValidationError("CSR indptr[n_rows] must equal nnz");
    for (Index r = 0; r < n_rows_; ++r) {
        const Index b = indptr_[r];
        const Index e = indptr_[r + 1];
        if (e < b) throw ValidationError("CSR indptr decreases at row " + std::to_string(r));
        for (Index j = b; j < e; ++j) {
            if (indices_[j] >= n_cols_) {
                throw ValidationError("CSR column " + std::to_string(indices_[j]) + " out of range in row " +
                                      std::to_string(r));
            }
            if (j > b && indices_[j] <= indices_[j - 1]) {
                throw ValidationError("CSR row " + std::to_string(r) + " is not canonical (unsorted or duplicate)");
            }
        }
    }
    if (auto* w = std::get_if<std::vector<Real>>(&weights_); w && w->size() != indices_.size()) {
        throw ValidationError("CSR per-edge weights length " + std::to_string(w->size()) + " != nnz " +
                              std::to_string(indices_.size()));
    }
}

CsrMatrix CsrMatrix::from_edges(Index n_rows, Index n_cols, std::vector<WeightedEdge> edges)
{
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    std::vector<Index> indptr(std::size_t{n_rows} + 1, 0);
    std::vector<Index> indices;
    std::vector<Real> weights;
    indices.reserve(edges.size());
    weights.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        if (e.src >= n_rows || e.dst >= n_cols) {
            throw ValidationError("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                                  ") outside shape");
        }
        if (k > 0 && edges[k - 1].src == e.src && edges[k - 1].dst == e.dst) {
            weights.back() += e.weight;
            continue;
        }
        indices.push_back(e.dst);
        weights.push_back(e.weight);
        ++indptr[e.src + 1];
    }
    check_shape_fits(indices.size());
    for (Index r = 0; r < n_rows; ++r) indptr[r + 1] += indptr[r];
    return CsrMatrix(n_rows, n_cols, std::move(indptr), std::move(indices), std::move(weights));
}

CsrMatrix CsrMatrix::from_edges(Index n_rows, Index n_cols, std::vector<std::pair<Index, Index>> edges,
                                Real weight)
{
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    check_shape_fits(edges.size());
    std::vector<Index> indptr(std::size_t{n_rows} + 1, 0);
    std::vector<Index> indices;
    indices.reserve(edges.size());
    for (const auto& [src, dst] : edges) {
        if (src >= n_rows || dst >= n_cols) {
            throw ValidationError("edge (" + std::to_string(src) + ", " + std::to_string(dst) + ") outside shape");
        }
        indices.push_back(dst);
        ++indptr[src + 1];
    }
    for (Index r = 0; r < n_rows; ++r) indptr[r + 1] += indptr[r];
    return CsrMatrix(n_rows, n_cols, std::move(indptr), std::move(indices), HomogeneousWeight{weight});
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& m)
{
    std::vector<Index> indptr(m.rows() + 1, 0);
    std::vector<Index> indices;
    std::vector<Real> weights;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) != Real{0}) {
                indices.push_back(static_cast<Index>(j));
                weights.push_back(m(i, j));
            }
        }
        indptr[i + 1] = static_cast<Index>(indices.size());
    }
    return CsrMatrix(static_cast<Index>(m.rows()), static_cast<Index>(m.cols()), std::move(indptr),
                     std::move(indices), std::move(weights));
}

Real CsrMatrix::weight_at(std::size_t edge) const
{
    if (const auto* h = std::get_if<HomogeneousWeight>(&weights_)) return h->value;
    return std::get<std::vector<Real>>(weights_)[edge];
}

std::vector<Index> CsrMatrix::edge_rows() const
{
    std::vector<Index> rows(nnz());
    for (Index r = 0; r < n_rows_; ++r)
        for (Index j = indptr_[r]; j < indptr_[r + 1]; ++j) rows[j] = r;
    return rows;
}

DenseMatrix CsrMatrix::densify() const
{
    DenseMatrix d(n_rows_, n_cols_);
    for (Index r = 0; r < n_rows_; ++r)
        for (Index j = indptr_[r]; j < indptr_[r + 1]; ++j) d(r, indices_[j]) = weight_at(j);
    return d;
}

CsrMatrix CsrMatrix::transposed() const
{
    std::vector<Index> indptr(std::size_t{n_cols_} + 1, 0);
    for (Index c : indices_) ++indptr[c + 1];
    for (Index c = 0; c < n_cols_; ++c) indptr[c + 1] += indptr[c];
    std::vector<Index> indices(nnz());
    std::vector<Real> weights(is_homogeneous() ? 0 : nnz());
    std::vector<Index> cursor(indptr.begin(), indptr.end() - 1);
    // Rows are visited in increasing order, so each transposed row comes out sorted.
    for (Index r = 0; r < n_rows_; ++r) {
        for (Index j = indptr_[r]; j < indptr_[r + 1]; ++j) {
            const Index slot = cursor[indices_[j]]++;
            indices[slot] = r;
            if (!is_homogeneous()) weights[slot] = edge_weights()[j];
        }
    }
    CsrWeights w = is_homogeneous() ? CsrWeights{HomogeneousWeight{homogeneous_weight()}}
                                    : CsrWeights{std::move(weights)};
    return CsrMatrix(n_cols_, n_rows_, std::move(indptr), std::move(indices), std::move(w));
}

std::size_t CsrMatrix::state_bytes() const
{
    return csr_state_bytes(n_rows_, nnz(), is_homogeneous());
}

std::size_t csr_state_bytes(std::size_t n_rows, std::size_t nnz, bool homogeneous)
{
    return (n_rows + 1) * sizeof(Index) + nnz * sizeof(Index) + (homogeneous ? 1 : nnz) * sizeof(Real);
}

}  // namespace spikekern
