#pragma once

#include <vector>

#include "bia/matrix.hpp"

namespace bia {

/// Singular values of A, descending. One-sided Jacobi; accurate at the sizes
/// the schemes produce (hundreds of rows/columns).
std::vector<double> singular_values(const Matrix& a);

/// Count of singular values above tol * largest. Zero matrices have rank 0.
long long numeric_rank(const Matrix& a, double tol = 1e-10);

/// Least-squares solution X of A X = B (A with rows >= cols). Returns X; the
/// caller judges feasibility from the residual A X - B.
Matrix solve_least_squares(const Matrix& a, const Matrix& b);

/// Inverse of a square matrix via Gauss-Jordan with partial pivoting.
Matrix inverse(const Matrix& a);

/// Cholesky log-determinant of a Hermitian positive definite matrix,
/// ln det(A). Throws parameter_error if a pivot is not positive.
double cholesky_logdet(const Matrix& a);

/// Generator-based MDS matrix: every maximal square column submatrix is
/// invertible. First row all ones so round one of the scheme superposes
/// messages unscaled.
struct MdsMatrix {
    Matrix base;                  // rows x cols coefficients
    std::vector<int> generators;  // distinct nodes behind the Vandermonde columns
};

/// Vandermonde coefficients with generators 1..cols: entry (i,j) = j^(i-1)
/// (1-based), so the first row is all ones.
MdsMatrix vandermonde_mds(int rows, int cols);

/// True iff every rows x rows column submatrix is nonsingular: smallest
/// singular value of each submatrix above tol * largest singular value of A.
bool is_mds(const Matrix& a, double tol = 1e-10);

/// Finds D with D^T family[desired] = I and D^T family[other] = 0 for every
/// other member, by least squares against the stacked family. Throws
/// alignment_error (carrying the family ranks) when the rank conditions fail.
Matrix solve_decoder(const std::vector<Matrix>& family, int desired, double tol = 1e-8);

}  // namespace bia
