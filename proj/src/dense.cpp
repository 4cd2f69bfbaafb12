#include "spikekern/dense.hpp"

namespace spikekern {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    require_same_size(data_.size(), rows * cols, "DenseMatrix data");
}

DenseMatrix DenseMatrix::identity(std::size_t n)
{
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

DenseMatrix DenseMatrix::transposed() const
{
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

}  // namespace spikekern
