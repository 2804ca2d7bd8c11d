#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "mlgp/errors.hpp"

namespace mlgp {

/// Dense row-major matrix of 64-bit floats. The one value type every
/// tape node, parameter tensor and dataset buffer is built from.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0.0) {}
    Matrix(int rows, int cols, std::vector<double> data);
    Matrix(int rows, int cols, std::initializer_list<double> data);

    static Matrix identity(int n);
    static Matrix constant(int rows, int cols, double value);
    static Matrix from_scalar(double value) { return Matrix(1, 1, {value}); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(int r, int c) { return data_[size_t(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[size_t(r) * cols_ + c]; }
    double& at(size_t i) { return data_[i]; }
    double at(size_t i) const { return data_[i]; }
    double scalar() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const;
    double max_abs() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Out-of-place dense kernels (Eigen-backed where it matters).
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
double sum(const Matrix& a);
double dot(const Matrix& a, const Matrix& b);

/// Cholesky of a symmetric matrix; throws NotPositiveDefinite.
Matrix cholesky_factor(const Matrix& a);
/// Solve L x = b for lower-triangular L (transposed=false) or L^T x = b.
Matrix tri_solve(const Matrix& l, const Matrix& b, bool transposed = false);
/// A^{-1} from its Cholesky factor.
Matrix spd_inverse_from_factor(const Matrix& l);

}  // namespace mlgp
