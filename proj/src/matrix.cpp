#include "modisco/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace modisco {

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows_) throw std::out_of_range("Matrix::slice_rows: bad range");
    Matrix out(end - begin, cols_);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
              data_.begin() + static_cast<std::ptrdiff_t>(end * cols_), out.data_.begin());
    return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_)
        throw std::invalid_argument("Matrix::operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix reverse_complement(const Matrix& m) {
    if (m.cols() % kAlphabetSize != 0)
        throw std::invalid_argument("reverse_complement: column count not a multiple of 4");
    Matrix out(m.rows(), m.cols());
    const std::size_t n = m.rows();
    for (std::size_t r = 0; r < n; ++r) {
        auto src = m.row(n - 1 - r);
        auto dst = out.row(r);
        for (std::size_t block = 0; block < m.cols(); block += kAlphabetSize)
            for (std::size_t b = 0; b < kAlphabetSize; ++b)
                dst[block + b] = src[block + (kAlphabetSize - 1 - b)];
    }
    return out;
}

double abs_sum(const Matrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += std::fabs(v);
    return s;
}

double total_sum(const Matrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v;
    return s;
}

std::vector<double> row_sums(const Matrix& m) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (double v : m.row(r)) out[r] += v;
    return out;
}

Matrix column_block(const Matrix& m, std::size_t col_begin, std::size_t ncols) {
    if (col_begin + ncols > m.cols()) throw std::out_of_range("column_block: bad range");
    Matrix out(m.rows(), ncols);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < ncols; ++c) out(r, c) = m(r, col_begin + c);
    return out;
}

void set_column_block(Matrix& dst, std::size_t col_begin, const Matrix& block) {
    if (block.rows() != dst.rows() || col_begin + block.cols() > dst.cols())
        throw std::out_of_range("set_column_block: bad shape");
    for (std::size_t r = 0; r < block.rows(); ++r)
        for (std::size_t c = 0; c < block.cols(); ++c) dst(r, col_begin + c) = block(r, c);
}

}  // namespace modisco
