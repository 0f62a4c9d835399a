#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "drmea/errors.hpp"

namespace drmea {

// Dense real matrix, column-major: column j is sample/vector j.
// Constructors reject empty shapes and non-finite entries.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);                        // zeros
    Matrix(std::size_t rows, std::size_t cols, double fill);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> column_major);
    // Row-major nested-list constructor for small literals in tests.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix column(const std::vector<double>& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Throws NumericError if any entry is NaN or Inf.
    void check_finite(const char* where) const;

    Matrix transposed() const;
    Matrix col_copy(std::size_t j) const;                              // rows x 1
    void set_col(std::size_t j, const Matrix& v);

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix hadamard(const Matrix& a, const Matrix& b);

double frobenius_sq(const Matrix& a);
double sum_entries(const Matrix& a);
double max_abs(const Matrix& a);
double col_norm(const Matrix& a, std::size_t j);

// Mean over columns, rows x 1.
Matrix col_mean(const Matrix& a);
// Sum over columns, rows x 1.
Matrix col_sum(const Matrix& a);
// Subtract the column mean from every column.
Matrix center_columns_value(const Matrix& a);

}  // namespace drmea
