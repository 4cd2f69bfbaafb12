#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "spikekern/csr.hpp"
#include "spikekern/dense.hpp"
#include "spikekern/exec.hpp"
#include "spikekern/spike_vector.hpp"

namespace spikekern {

/// Instrumentation counters. Kernels only count when handed a non-null pointer.
struct KernelStats {
    /// Weight values consumed by an accumulation.
    std::uint64_t weight_reads = 0;
    /// Weight samples drawn by JIT kernels.
    std::uint64_t weight_draws = 0;
};

// All `_into` variants overwrite `out` completely.

/// y = m v, or y = m^T v when transpose is set.
std::vector<Real> dense_matvec(const DenseMatrix& m, std::span<const Real> v, bool transpose = false);
void dense_matvec_into(const DenseMatrix& m, std::span<const Real> v, bool transpose, std::span<Real> out);

/// Non-event sparse product: y = M v (gather) or y = M^T v (scatter).
std::vector<Real> csrmv(const CsrMatrix& m, std::span<const Real> v, bool transpose, Exec exec = {});
void csrmv_into(const CsrMatrix& m, std::span<const Real> v, bool transpose, std::span<Real> out,
                Exec exec = {});

/// Event-driven product over a boolean input.
///
/// transpose = true is the scatter form: for every active row i, each edge j
/// of row i adds its weight to y[indices[j]]. Inactive rows are never touched.
/// transpose = false is the gather form: y[i] sums weights of row i whose
/// column is active; weights of inactive columns are never read.
std::vector<Real> event_csrmv(const CsrMatrix& m, const SpikeVector& events, bool transpose, Exec exec = {},
                              KernelStats* stats = nullptr);
void event_csrmv_into(const CsrMatrix& m, const SpikeVector& events, bool transpose, std::span<Real> out,
                      Exec exec = {}, KernelStats* stats = nullptr);

/// d(cotangent . event_csrmv(m, events, transpose)) / d weights.
/// Scalar for homogeneous matrices, one entry per edge otherwise.
using WeightGrad = std::variant<Real, std::vector<Real>>;
WeightGrad event_csrmv_weight_grad(const CsrMatrix& m, const SpikeVector& events,
                                   std::span<const Real> cotangent, bool transpose);

}  // namespace spikekern
