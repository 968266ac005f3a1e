#include "bia/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bia/errors.hpp"

namespace bia {
namespace {

// One-sided Jacobi on the columns of a copy of A (rows >= cols assumed by the
// caller). Orthogonalizes column pairs until all inner products are negligible
// relative to the column norms.
std::vector<double> jacobi_singular_values(Matrix a) {
    const long long m = a.rows();
    const long long n = a.cols();
    const double eps = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (long long p = 0; p < n - 1; ++p) {
            for (long long q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                cplx apq = 0.0;
                for (long long r = 0; r < m; ++r) {
                    const cplx vp = a(r, p), vq = a(r, q);
                    app += std::norm(vp);
                    aqq += std::norm(vq);
                    apq += std::conj(vp) * vq;
                }
                const double off = std::abs(apq);
                if (off <= eps * std::sqrt(app * aqq) || off == 0.0) continue;
                rotated = true;
                const cplx phase = apq / off;
                const double tau = (aqq - app) / (2.0 * off);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (long long r = 0; r < m; ++r) {
                    const cplx vp = a(r, p), vq = a(r, q);
                    a(r, p) = c * vp - s * std::conj(phase) * vq;
                    a(r, q) = s * phase * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(static_cast<std::size_t>(n));
    for (long long c = 0; c < n; ++c) {
        double norm2 = 0.0;
        for (long long r = 0; r < m; ++r) norm2 += std::norm(a(r, c));
        sv[static_cast<std::size_t>(c)] = std::sqrt(norm2);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

// Householder QR of A in place; transformations applied to B as well.
// Afterwards the top cols x cols of A holds R.
void householder_qr(Matrix& a, Matrix& b) {
    const long long m = a.rows();
    const long long n = a.cols();
    std::vector<cplx> v(static_cast<std::size_t>(m));
    for (long long k = 0; k < n; ++k) {
        double norm2 = 0.0;
        for (long long r = k; r < m; ++r) norm2 += std::norm(a(r, k));
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) continue;
        const cplx akk = a(k, k);
        const double aabs = std::abs(akk);
        const cplx phase = aabs > 0 ? akk / aabs : cplx{1.0, 0.0};
        // v = x + phase * ||x|| * e_k
        double vnorm2 = 0.0;
        for (long long r = k; r < m; ++r) {
            v[static_cast<std::size_t>(r)] = a(r, k);
        }
        v[static_cast<std::size_t>(k)] += phase * norm;
        for (long long r = k; r < m; ++r) vnorm2 += std::norm(v[static_cast<std::size_t>(r)]);
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        auto reflect = [&](Matrix& target, long long col0) {
            for (long long c = col0; c < target.cols(); ++c) {
                cplx dot = 0.0;
                for (long long r = k; r < m; ++r) dot += std::conj(v[static_cast<std::size_t>(r)]) * target(r, c);
                dot *= beta;
                for (long long r = k; r < m; ++r) target(r, c) -= dot * v[static_cast<std::size_t>(r)];
            }
        };
        reflect(a, k);
        reflect(b, 0);
    }
}

}  // namespace

std::vector<double> singular_values(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return {};
    if (a.rows() >= a.cols()) return jacobi_singular_values(a);
    return jacobi_singular_values(a.conj_transpose());
}

long long numeric_rank(const Matrix& a, double tol) {
    if (!a.all_finite()) throw parameter_error("numeric_rank: non-finite entries");
    const std::vector<double> sv = singular_values(a);
    if (sv.empty() || sv.front() == 0.0) return 0;
    const double cutoff = tol * sv.front();
    long long rank = 0;
    for (double s : sv) {
        if (s > cutoff) ++rank;
    }
    return rank;
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw parameter_error("solve_least_squares: row counts disagree");
    if (a.rows() < a.cols()) throw parameter_error("solve_least_squares: underdetermined system");
    Matrix qr = a;
    Matrix rhs = b;
    householder_qr(qr, rhs);
    const long long n = a.cols();
    Matrix x(n, b.cols());
    for (long long c = 0; c < b.cols(); ++c) {
        for (long long r = n - 1; r >= 0; --r) {
            cplx acc = rhs(r, c);
            for (long long j = r + 1; j < n; ++j) acc -= qr(r, j) * x(j, c);
            const cplx piv = qr(r, r);
            x(r, c) = std::abs(piv) > 0 ? acc / piv : cplx{};
        }
    }
    return x;
}

Matrix inverse(const Matrix& a) {
    if (a.rows() != a.cols()) throw parameter_error("inverse: matrix not square");
    const long long n = a.rows();
    Matrix work = a;
    Matrix inv = Matrix::identity(n);
    for (long long col = 0; col < n; ++col) {
        long long piv = col;
        double best = std::abs(work(col, col));
        for (long long r = col + 1; r < n; ++r) {
            const double v = std::abs(work(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw parameter_error("inverse: singular matrix");
        if (piv != col) {
            for (long long c = 0; c < n; ++c) {
                std::swap(work(piv, c), work(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        }
        const cplx d = work(col, col);
        for (long long c = 0; c < n; ++c) {
            work(col, c) /= d;
            inv(col, c) /= d;
        }
        for (long long r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = work(r, col);
            if (f == cplx{}) continue;
            for (long long c = 0; c < n; ++c) {
                work(r, c) -= f * work(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

double cholesky_logdet(const Matrix& a) {
    if (a.rows() != a.cols()) throw parameter_error("cholesky_logdet: matrix not square");
    const long long n = a.rows();
    Matrix l(n, n);
    double logdet = 0.0;
    for (long long i = 0; i < n; ++i) {
        for (long long j = 0; j <= i; ++j) {
            cplx acc = a(i, j);
            for (long long k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
            if (i == j) {
                const double d = acc.real();
                if (d <= 0.0) throw parameter_error("cholesky_logdet: matrix not positive definite");
                l(i, j) = std::sqrt(d);
                logdet += std::log(d);
            } else {
                l(i, j) = acc / l(j, j);
            }
        }
    }
    return logdet;
}

MdsMatrix vandermonde_mds(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows > cols)
        throw parameter_error("vandermonde_mds: need 1 <= rows <= cols");
    MdsMatrix mds;
    mds.base = Matrix(rows, cols);
    mds.generators.resize(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
        mds.generators[static_cast<std::size_t>(j)] = j + 1;
        double power = 1.0;
        for (int i = 0; i < rows; ++i) {
            mds.base(i, j) = power;
            power *= static_cast<double>(j + 1);
        }
    }
    return mds;
}

bool is_mds(const Matrix& a, double tol) {
    const long long r = a.rows();
    const long long c = a.cols();
    if (r < 1 || c < 1 || r > c) return false;
    const std::vector<double> sv = singular_values(a);
    const double scale = sv.front();
    if (scale == 0.0) return false;
    // enumerate all r-column choices
    std::vector<long long> pick(static_cast<std::size_t>(r));
    for (long long i = 0; i < r; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        const Matrix sub = a.submatrix_cols(pick);
        const std::vector<double> ssv = singular_values(sub);
        if (ssv.back() <= tol * scale) return false;
        long long i = r - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == c - (r - i)) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (long long j = i + 1; j < r; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return true;
}

Matrix solve_decoder(const std::vector<Matrix>& family, int desired, double tol) {
    if (family.empty()) throw parameter_error("solve_decoder: empty family");
    if (desired < 0 || desired >= static_cast<int>(family.size()))
        throw parameter_error("solve_decoder: desired index out of range");
    const long long t_p = family.front().rows();
    const long long width = family[static_cast<std::size_t>(desired)].cols();
    Matrix stacked = family.front();
    for (std::size_t i = 1; i < family.size(); ++i) {
        if (family[i].rows() != t_p) throw parameter_error("solve_decoder: family row counts disagree");
        stacked = stacked.hcat(family[i]);
    }
    // D solves stacked^T D = target, target the identity block at `desired`.
    Matrix target(stacked.cols(), width);
    long long offset = 0;
    for (int i = 0; i < desired; ++i) offset += family[static_cast<std::size_t>(i)].cols();
    for (long long j = 0; j < width; ++j) target(offset + j, j) = 1.0;

    const Matrix lhs = stacked.transpose();
    const Matrix d = solve_least_squares(lhs, target);
    const Matrix residual = lhs * d - target;
    const double err = residual.max_abs();
    if (!(err < tol) || !d.all_finite()) {
        std::vector<long long> ranks;
        ranks.reserve(family.size());
        long long total = 0;
        for (const Matrix& e : family) {
            const long long r = numeric_rank(e);
            ranks.push_back(r);
            total += r;
        }
        const long long union_rank = numeric_rank(stacked);
        throw alignment_error("solve_decoder: rank conditions violated (residual " + std::to_string(err) +
                                  ", union rank " + std::to_string(union_rank) + " of " +
                                  std::to_string(t_p) + ")",
                              std::move(ranks), union_rank, t_p);
    }
    return d;
}

}  // namespace bia
