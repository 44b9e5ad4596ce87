#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace liftgraph {

/// Dense row-major matrix of doubles. Plain value type; the autodiff layer
/// wraps it in DiffMatrix.
class Matrix {
   public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix identity(std::size_t n);
    /// Column vector from values.
    static Matrix column(std::span<const double> values);
    /// Row vector from values.
    static Matrix row(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row_span(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;

    /// Accumulates other into this (same shape).
    void add_in_place(const Matrix& other);

    std::string shape_string() const;

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(std::size_t rows, std::size_t cols);

/// Largest absolute entrywise difference; throws ShapeError on mismatch.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Compressed sparse row matrix, column indices ascending within each row.
/// Used as a constant left operand (adjacency-like matrices).
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }
    /// Entry lookup by binary search; zero when absent.
    double at(std::size_t r, std::size_t c) const;
    Matrix to_dense() const;
    CsrMatrix transposed() const;
};

}  // namespace liftgraph
