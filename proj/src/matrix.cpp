#include "drmea/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace drmea {

namespace {

void check_shape_positive(std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) {
        throw UsageError("matrix shape must be at least 1x1, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    check_shape_positive(rows, cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    check_shape_positive(rows, cols);
    check_finite("Matrix(fill)");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    check_shape_positive(rows, cols);
    if (data_.size() != rows * cols) {
        throw UsageError("matrix data size " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    check_finite("Matrix(data)");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    check_shape_positive(rows_, cols_);
    data_.assign(rows_ * cols_, 0.0);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != cols_) throw UsageError("ragged row in matrix literal");
        std::size_t j = 0;
        for (double v : row) (*this)(i, j++) = v;
        ++i;
    }
    check_finite("Matrix(literal)");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(const std::vector<double>& v) {
    return Matrix(v.size(), 1, v);
}

void Matrix::check_finite(const char* where) const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite entry in ") + where);
        }
    }
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::col_copy(std::size_t j) const {
    Matrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
}

void Matrix::set_col(std::size_t j, const Matrix& v) {
    if (v.rows() != rows_ || v.cols() != 1) throw UsageError("set_col shape mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v(i, 0);
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw UsageError("operator+= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw UsageError("operator-= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw UsageError("matmul shape mismatch: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n);
    // j-p-i order keeps unit stride on both a and c in column-major storage.
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < k; ++p) {
            const double bpj = b(p, j);
            if (bpj == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) c(i, j) += a(i, p) * bpj;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw UsageError("matmul_tn shape mismatch");
    const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
    Matrix c(m, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a(p, i) * b(p, j);
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw UsageError("matmul_nt shape mismatch");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t j = 0; j < n; ++j) {
            const double bjp = b(j, p);
            if (bjp == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) c(i, j) += a(i, p) * bjp;
        }
    }
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw UsageError("hadamard shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

double frobenius_sq(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    return acc;
}

double sum_entries(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return acc;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

double col_norm(const Matrix& a, std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
}

Matrix col_mean(const Matrix& a) {
    Matrix m = col_sum(a);
    m *= 1.0 / static_cast<double>(a.cols());
    return m;
}

Matrix col_sum(const Matrix& a) {
    Matrix s(a.rows(), 1);
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) s(i, 0) += a(i, j);
    return s;
}

Matrix center_columns_value(const Matrix& a) {
    Matrix mean = col_mean(a);
    Matrix c = a;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) -= mean(i, 0);
    return c;
}

}  // namespace drmea
