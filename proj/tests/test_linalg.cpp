#include <doctest.h>

#include <cmath>

#include "bia/errors.hpp"
#include "bia/linalg.hpp"
#include "bia/rng.hpp"

using namespace bia;

namespace {

Matrix random_matrix(long long rows, long long cols, std::uint64_t seed) {
    const RandomStream s(seed);
    Matrix m(rows, cols);
    for (long long r = 0; r < rows; ++r)
        for (long long c = 0; c < cols; ++c) m(r, c) = s.cnormal(static_cast<std::uint64_t>(r * cols + c));
    return m;
}

}  // namespace

TEST_CASE("vandermonde coefficients") {
    const MdsMatrix m = vandermonde_mds(3, 4);
    const double expected[3][4] = {{1, 1, 1, 1}, {1, 2, 3, 4}, {1, 4, 9, 16}};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) CHECK(m.base(r, c) == cplx{expected[r][c], 0.0});

    const MdsMatrix ones = vandermonde_mds(1, 5);
    for (int c = 0; c < 5; ++c) CHECK(ones.base(0, c) == cplx{1.0, 0.0});

    const MdsMatrix m23 = vandermonde_mds(2, 3);
    const double expected23[2][3] = {{1, 1, 1}, {1, 2, 3}};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) CHECK(m23.base(r, c) == cplx{expected23[r][c], 0.0});

    CHECK_THROWS_AS(vandermonde_mds(4, 3), parameter_error);
}

TEST_CASE("mds detection") {
    CHECK(is_mds(vandermonde_mds(3, 4).base));
    Matrix repeated(2, 3);
    repeated(0, 0) = repeated(0, 1) = repeated(0, 2) = 1.0;
    repeated(1, 0) = repeated(1, 1) = 1.0;
    repeated(1, 2) = 2.0;
    CHECK_FALSE(is_mds(repeated));  // columns 1,2 give a singular minor
    Matrix wide(3, 2);
    CHECK_FALSE(is_mds(wide));
}

TEST_CASE("generator-based coefficient matrices are mds over the scheme range") {
    // every coefficient matrix the schemes build has at most 6 rows (nu_g at
    // K <= 5); those clear the 1e-10 relative threshold with room to spare
    for (int c = 1; c <= 12; ++c)
        for (int r = 1; r <= std::min(c, 6); ++r) CHECK(is_mds(vandermonde_mds(r, c).base, 1e-10));
    // beyond that the minors of integer-generator Vandermonde matrices sink
    // below double precision: the 12x12 one is numerically singular
    CHECK_FALSE(is_mds(vandermonde_mds(12, 12).base, 1e-10));
    CHECK(is_mds(vandermonde_mds(12, 12).base, 1e-17));
}

TEST_CASE("kronecker and block diagonal") {
    const Matrix i6 = kron(Matrix::identity(2), Matrix::identity(3));
    CHECK((i6 - Matrix::identity(6)).max_abs() == 0.0);

    Matrix selector(1, 2);
    selector(0, 0) = 1.0;  // first basis row of I_2
    const Matrix rows = kron(selector, Matrix::identity(2));
    REQUIRE(rows.rows() == 2);
    REQUIRE(rows.cols() == 4);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c) CHECK(rows(r, c) == (r == c ? cplx{1.0, 0.0} : cplx{}));

    const Matrix h = random_matrix(1, 4, 3);
    const Matrix single = block_diag({h});
    CHECK((single - h).max_abs() == 0.0);

    // mixed product property on random inputs
    const Matrix a = random_matrix(3, 3, 10), b = random_matrix(3, 3, 11);
    const Matrix c = random_matrix(3, 3, 12), d = random_matrix(3, 3, 13);
    const Matrix lhs = kron(a, b) * kron(c, d);
    const Matrix rhs = kron(a * c, b * d);
    CHECK((lhs - rhs).max_abs() < 1e-10 * rhs.max_abs());
}

TEST_CASE("numeric rank") {
    CHECK(numeric_rank(Matrix::identity(5)) == 5);
    const Matrix u = random_matrix(6, 1, 4);
    const Matrix v = random_matrix(1, 4, 5);
    CHECK(numeric_rank(u * v) == 1);
    Matrix zero(3, 3);
    CHECK(numeric_rank(zero) == 0);
    Matrix bad(1, 1);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(numeric_rank(bad), parameter_error);
}

TEST_CASE("least squares and inverse") {
    const Matrix a = random_matrix(8, 4, 21);
    const Matrix x_true = random_matrix(4, 2, 22);
    const Matrix b = a * x_true;
    const Matrix x = solve_least_squares(a, b);
    CHECK((x - x_true).max_abs() < 1e-10);

    const Matrix sq = random_matrix(5, 5, 23);
    const Matrix prod = sq * inverse(sq);
    CHECK((prod - Matrix::identity(5)).max_abs() < 1e-9);
}

TEST_CASE("cholesky log determinant") {
    Matrix d(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    d(2, 2) = 8.0;
    CHECK(cholesky_logdet(d) == doctest::Approx(std::log(64.0)));
    const Matrix g = random_matrix(4, 4, 30);
    const Matrix psd = g * g.conj_transpose() + Matrix::identity(4);
    CHECK(std::isfinite(cholesky_logdet(psd)));
    Matrix indef = Matrix::identity(2);
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(cholesky_logdet(indef), parameter_error);
}

TEST_CASE("decoder solving on orthogonal supports") {
    Matrix e1(4, 2), e2(4, 2);
    e1(0, 0) = e1(1, 1) = 1.0;  // I_2 stacked over 0
    e2(2, 0) = e2(3, 1) = 1.0;  // 0 stacked over I_2
    const Matrix d = solve_decoder({e1, e2}, 0);
    const Matrix dt = d.transpose();
    CHECK((dt * e1 - Matrix::identity(2)).max_abs() < 1e-12);
    CHECK((dt * e2).max_abs() < 1e-12);
}

TEST_CASE("decoder solving rejects overlapping spans") {
    Matrix e1(4, 2), e2(4, 2);
    e1(0, 0) = e1(1, 1) = 1.0;
    e2(0, 0) = e2(1, 1) = 1.0;  // identical column span
    e2(2, 0) = 0.5;
    try {
        solve_decoder({e1, e2}, 0);
        FAIL("expected alignment_error");
    } catch (const alignment_error& err) {
        CHECK(err.family_ranks.size() == 2);
        CHECK(err.union_rank >= 0);
    }
}
