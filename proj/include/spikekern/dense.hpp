#pragma once

#include <span>
#include <vector>

#include "spikekern/types.hpp"

namespace spikekern {

/// Row-major dense matrix. Used as the O(n^2) baseline and as a test oracle.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real{0}) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    Real operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const Real> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<const Real> data() const { return data_; }

    DenseMatrix transposed() const;
    std::size_t state_bytes() const { return data_.size() * sizeof(Real); }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

}  // namespace spikekern
