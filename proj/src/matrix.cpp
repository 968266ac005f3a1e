#include "bia/matrix.hpp"

#include <cmath>

#include "bia/errors.hpp"

namespace bia {

Matrix Matrix::identity(long long n) {
    Matrix m(n, n);
    for (long long i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (long long r = 0; r < rows_; ++r)
        for (long long c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::conj_transpose() const {
    Matrix t(cols_, rows_);
    for (long long r = 0; r < rows_; ++r)
        for (long long c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw parameter_error("matrix product: inner dimensions disagree");
    Matrix out(rows_, rhs.cols_);
    for (long long i = 0; i < rows_; ++i) {
        cplx* dst = out.row_ptr(i);
        for (long long k = 0; k < cols_; ++k) {
            const cplx a = (*this)(i, k);
            if (a == cplx{}) continue;
            const cplx* src = rhs.row_ptr(k);
            for (long long j = 0; j < rhs.cols_; ++j) dst[j] += a * src[j];
        }
    }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw parameter_error("matrix sum: shapes disagree");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + rhs.data_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw parameter_error("matrix difference: shapes disagree");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
    return out;
}

Matrix Matrix::operator*(cplx scalar) const {
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * scalar;
    return out;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (const cplx& v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (const cplx& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool Matrix::all_finite() const {
    for (const cplx& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

Matrix Matrix::hcat(const Matrix& rhs) const {
    if (rows_ != rhs.rows_) throw parameter_error("hcat: row counts disagree");
    Matrix out(rows_, cols_ + rhs.cols_);
    for (long long r = 0; r < rows_; ++r) {
        for (long long c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c);
        for (long long c = 0; c < rhs.cols_; ++c) out(r, cols_ + c) = rhs(r, c);
    }
    return out;
}

Matrix Matrix::submatrix_cols(const std::vector<long long>& cols) const {
    Matrix out(rows_, static_cast<long long>(cols.size()));
    for (long long r = 0; r < rows_; ++r)
        for (std::size_t j = 0; j < cols.size(); ++j) out(r, static_cast<long long>(j)) = (*this)(r, cols[j]);
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long long ar = 0; ar < a.rows(); ++ar)
        for (long long ac = 0; ac < a.cols(); ++ac) {
            const cplx v = a(ar, ac);
            if (v == cplx{}) continue;
            for (long long br = 0; br < b.rows(); ++br)
                for (long long bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = v * b(br, bc);
        }
    return out;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    long long rows = 0, cols = 0;
    for (const Matrix& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out(rows, cols);
    long long r0 = 0, c0 = 0;
    for (const Matrix& b : blocks) {
        for (long long r = 0; r < b.rows(); ++r)
            for (long long c = 0; c < b.cols(); ++c) out(r0 + r, c0 + c) = b(r, c);
        r0 += b.rows();
        c0 += b.cols();
    }
    return out;
}

}  // namespace bia
