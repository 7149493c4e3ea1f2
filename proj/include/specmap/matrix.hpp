#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specmap {

// Dense row-major matrix. Rows are contiguous so kernels can hand out
// per-row spans and parallelize across output slots.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    // First n_cols columns as a new matrix (prefix slice used by sweeps).
    Matrix left_cols(std::size_t n_cols) const {
        Matrix out(rows_, n_cols);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < n_cols; ++j)
                out(i, j) = (*this)(i, j);
        return out;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace specmap
