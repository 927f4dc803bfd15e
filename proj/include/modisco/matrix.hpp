#pragma once
// Dense row-major matrix used for every per-position track (L x 4 one-hot,
// contribution and hypothetical blocks, concatenated feature matrices).

#include <cstddef>
#include <span>
#include <vector>

namespace modisco {

inline constexpr std::size_t kAlphabetSize = 4;  // A, C, G, T

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    // Rows [begin, end) as a new matrix.
    Matrix slice_rows(std::size_t begin, std::size_t end) const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator*=(double s);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Reverse the row order and, inside every consecutive group of four columns,
// swap A<->T and C<->G. Works for any column count divisible by four.
Matrix reverse_complement(const Matrix& m);

double abs_sum(const Matrix& m);
double total_sum(const Matrix& m);

// Sum of each row.
std::vector<double> row_sums(const Matrix& m);

// Columns [col_begin, col_begin + ncols) of every row.
Matrix column_block(const Matrix& m, std::size_t col_begin, std::size_t ncols);

// Place `block` into `dst` starting at column col_begin.
void set_column_block(Matrix& dst, std::size_t col_begin, const Matrix& block);

}  // namespace modisco
