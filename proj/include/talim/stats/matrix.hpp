#ifndef TALIM_STATS_MATRIX_HPP
#define TALIM_STATS_MATRIX_HPP

#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "talim/error.hpp"

namespace talim::stats {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < m.rows_; ++i) {
            if (rows[i].size() != m.cols_) throw Error(ErrorCode::InvalidMatrix, "ragged rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// First `m` columns.
    Matrix leading_columns(std::size_t m) const {
        Matrix out(rows_, m);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < m; ++j) out(i, j) = (*this)(i, j);
        return out;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw Error(ErrorCode::InvalidMatrix, "dimension mismatch in product");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

/// Observations (rows) by variables (columns) with their labels.
struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    Matrix values;

    std::size_t n() const noexcept { return values.rows(); }
    std::size_t p() const noexcept { return values.cols(); }

    void validate() const {
        if (row_ids.size() != values.rows() || col_ids.size() != values.cols())
            throw Error(ErrorCode::InvalidMatrix, "label count does not match matrix shape");
        if (values.rows() < 3) throw Error(ErrorCode::InvalidMatrix, "need at least 3 observations");
        if (values.cols() < 2) throw Error(ErrorCode::InvalidMatrix, "need at least 2 variables");
        for (std::size_t i = 0; i < values.rows(); ++i)
            for (std::size_t j = 0; j < values.cols(); ++j)
                if (!std::isfinite(values(i, j)))
                    throw Error(ErrorCode::InvalidMatrix,
                                "non-finite value at " + row_ids[i] + "/" + col_ids[j]);
    }
};

/// Swaps observations and variables, e.g. to correlate strokes across features.
inline FeatureMatrix transpose_analysis(const FeatureMatrix& m) {
    m.validate();
    return {m.col_ids, m.row_ids, m.values.transposed()};
}

} // namespace talim::stats

#endif
