#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "spikekern/csr.hpp"

namespace spikekern {

// Binary layout (little-endian):
//   8 bytes  magic "SPKCSR1\0"
//   u32      n_rows
//   u32      n_cols
//   u32      indptr[n_rows + 1]
//   u32      indices[nnz]            nnz = indptr[n_rows]
//   u8       weight kind             0 = homogeneous, 1 = per edge
//   f64      weight                  (homogeneous)
//   f64      weights[nnz]            (per edge)

inline constexpr char kCsrMagic[8] = {'S', 'P', 'K', 'C', 'S', 'R', '1', '\0'};

void write_csr(std::ostream& os, const CsrMatrix& m);
CsrMatrix read_csr(std::istream& is);
void save_csr(const std::filesystem::path& path, const CsrMatrix& m);
CsrMatrix load_csr(const std::filesystem::path& path);

struct Shape {
    Index n_rows;
    Index n_cols;
};

/// Plain-text edge list, one "src dst [weight]" per line; '#' starts a comment.
/// Without weights the result is homogeneous with weight 1. Either every edge
/// line carries a weight or none does. Without an explicit shape the matrix is
/// sized to the largest index seen.
CsrMatrix read_edge_list(std::istream& is, std::optional<Shape> shape = std::nullopt);
CsrMatrix load_edge_list(const std::filesystem::path& path, std::optional<Shape> shape = std::nullopt);

}  // namespace spikekern
