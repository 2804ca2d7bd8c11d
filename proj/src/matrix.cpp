#include "mlgp/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace mlgp {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

CMap cmap(const Matrix& m) { return CMap(m.data(), m.rows(), m.cols()); }
Map map(Matrix& m) { return Map(m.data(), m.rows(), m.cols()); }

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

}  // namespace

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != size_t(rows) * cols) throw ShapeMismatch("Matrix ctor data length");
}

Matrix::Matrix(int rows, int cols, std::initializer_list<double> data)
    : Matrix(rows, cols, std::vector<double>(data)) {}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::constant(int rows, int cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
}

double Matrix::scalar() const {
    if (!is_scalar()) throw ShapeMismatch("scalar() on non-1x1 matrix");
    return data_[0];
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul inner dimensions");
    Matrix out(a.rows(), b.cols());
    map(out).noalias() = cmap(a) * cmap(b);
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    map(out) = cmap(a).transpose();
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix out = a;
    map(out) += cmap(b);
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix out = a;
    map(out) -= cmap(b);
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix out(a.rows(), a.cols());
    map(out) = cmap(a).cwiseProduct(cmap(b));
    return out;
}

Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    map(out) *= c;
    return out;
}

double sum(const Matrix& a) { return cmap(a).sum(); }

double dot(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "dot");
    return cmap(a).cwiseProduct(cmap(b)).sum();
}

Matrix cholesky_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeMismatch("cholesky of non-square matrix");
    Eigen::LLT<EMat> llt(cmap(a));
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky pivot failure at size " + std::to_string(a.rows()));
    Matrix out(a.rows(), a.cols());
    map(out) = EMat(llt.matrixL());
    return out;
}

Matrix tri_solve(const Matrix& l, const Matrix& b, bool transposed) {
    if (l.rows() != l.cols()) throw ShapeMismatch("tri_solve: factor not square");
    if (l.rows() != b.rows()) throw ShapeMismatch("tri_solve: rhs rows");
    Matrix out = b;
    if (transposed)
        cmap(l).transpose().triangularView<Eigen::Upper>().solveInPlace(map(out));
    else
        cmap(l).triangularView<Eigen::Lower>().solveInPlace(map(out));
    return out;
}

Matrix spd_inverse_from_factor(const Matrix& l) {
    Matrix inv_l = tri_solve(l, Matrix::identity(l.rows()));
    Matrix out(l.rows(), l.cols());
    map(out).noalias() = cmap(inv_l).transpose() * cmap(inv_l);
    return out;
}

}  // namespace mlgp
