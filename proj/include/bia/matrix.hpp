#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bia {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major, value semantics. Sized for desk-scale
/// scheme verification; anything that grows with the scheme duration T_p goes
/// through the sparse scheme paths instead.
class Matrix {
public:
    Matrix() = default;
    Matrix(long long rows, long long cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

    static Matrix identity(long long n);

    long long rows() const { return rows_; }
    long long cols() const { return cols_; }

    cplx& operator()(long long r, long long c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    const cplx& operator()(long long r, long long c) const {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }

    cplx* row_ptr(long long r) { return data_.data() + r * cols_; }
    const cplx* row_ptr(long long r) const { return data_.data() + r * cols_; }

    Matrix transpose() const;
    Matrix conj_transpose() const;

    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix operator*(cplx scalar) const;

    double max_abs() const;
    double frobenius_norm() const;
    bool all_finite() const;

    /// Columns of `this` followed by columns of rhs (same row count).
    Matrix hcat(const Matrix& rhs) const;

    Matrix submatrix_cols(const std::vector<long long>& cols) const;

private:
    long long rows_ = 0;
    long long cols_ = 0;
    std::vector<cplx> data_;
};

Matrix kron(const Matrix& a, const Matrix& b);
Matrix block_diag(const std::vector<Matrix>& blocks);

}  // namespace bia
