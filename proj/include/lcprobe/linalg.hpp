#pragma once

#include <cstddef>
#include <vector>

namespace lcprobe {

// Dense row-major square-friendly matrix; sized for construct counts (~15),
// not for large numerics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    static Matrix identity(std::size_t n);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

// Cyclic Jacobi rotations; input must be symmetric.
EigenDecomposition sym_eigen(const Matrix& a);

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Returns false when a non-positive pivot is met.
bool cholesky_lower(const Matrix& a, Matrix& lower);

}  // namespace lcprobe
