#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "spikekern/dense.hpp"
#include "spikekern/types.hpp"

namespace spikekern {

/// Every stored edge carries the same value; stored once.
struct HomogeneousWeight {
    Real value = 1;
    bool operator==(const HomogeneousWeight&) const = default;
};

using CsrWeights = std::variant<HomogeneousWeight, std::vector<Real>>;

struct WeightedEdge {
    Index src;
    Index dst;
    Real weight;
};

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increase within each row.
///
/// Connectivity matrices are stored pre-major (row = presynaptic neuron,
/// column = postsynaptic neuron), so the transpose product y = M^T v is the
/// scatter form driven by presynaptic events.
class CsrMatrix {
public:
    CsrMatrix() : indptr_(1, 0), weights_(HomogeneousWeight{}) {}

    /// Takes ownership of already-canonical arrays. Throws ValidationError if
    /// any invariant is violated.
    CsrMatrix(Index n_rows, Index n_cols, std::vector<Index> indptr, std::vector<Index> indices,
              CsrWeights weights);

    /// Builds from an unordered edge list. Duplicates are merged by summing.
    static CsrMatrix from_edges(Index n_rows, Index n_cols, std::vector<WeightedEdge> edges);

    /// Builds a homogeneous matrix. Duplicate (src, dst) pairs collapse to one edge.
    static CsrMatrix from_edges(Index n_rows, Index n_cols, std::vector<std::pair<Index, Index>> edges,
                                Real weight);

    static CsrMatrix from_dense(const DenseMatrix& m);

    Index n_rows() const { return n_rows_; }
    Index n_cols() const { return n_cols_; }
    std::size_t nnz() const { return indices_.size(); }

    std::span<const Index> indptr() const { return indptr_; }
    std::span<const Index> indices() const { return indices_; }
    const CsrWeights& weights() const { return weights_; }

    bool is_homogeneous() const { return std::holds_alternative<HomogeneousWeight>(weights_); }
    Real homogeneous_weight() const { return std::get<HomogeneousWeight>(weights_).value; }
    std::span<const Real> edge_weights() const { return std::get<std::vector<Real>>(weights_); }
    Real weight_at(std::size_t edge) const;

    /// Row index owning each edge (the expanded form of indptr).
    std::vector<Index> edge_rows() const;

    DenseMatrix densify() const;
    CsrMatrix transposed() const;

    /// Analytic storage: u32 indptr + u32 indices + weights (one scalar if homogeneous).
    std::size_t state_bytes() const;

    bool operator==(const CsrMatrix&) const = default;

private:
    void validate() const;

    Index n_rows_ = 0;
    Index n_cols_ = 0;
    std::vector<Index> indptr_;
    std::vector<Index> indices_;
    CsrWeights weights_;
};

/// Bytes a CSR with the given shape and nnz would occupy (see CsrMatrix::state_bytes).
std::size_t csr_state_bytes(std::size_t n_rows, std::size_t nnz, bool homogeneous);

}  // namespace spikekern
