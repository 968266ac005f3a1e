#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bia/bcgm.hpp"
#include "bia/channel.hpp"
#include "bia/errors.hpp"
#include "bia/linalg.hpp"

using namespace bia;

namespace {

// two-sample Kolmogorov-Smirnov distance
double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("channel draws are deterministic and unit variance") {
    const ChannelBook a = draw_channels(3, 2, 4, 2, 100, 77);
    const ChannelBook b = draw_channels(3, 2, 4, 2, 100, 77);
    for (int k = 1; k <= 3; ++k)
        for (int m = 1; m <= 2; ++m)
            for (long long q = 1; q <= 2; ++q) {
                const auto va = a.vector(k, m, q), vb = b.vector(k, m, q);
                for (int i = 0; i < 4; ++i) CHECK(va[i] == vb[i]);
            }

    const ChannelBook big = draw_channels(10, 5, 100, 20, 1000, 5);
    double sum = 0.0;
    long long count = 0;
    for (int k = 1; k <= 10; ++k)
        for (int m = 1; m <= 5; ++m)
            for (long long q = 1; q <= 20; ++q)
                for (const cplx& h : big.vector(k, m, q)) {
                    sum += std::norm(h);
                    ++count;
                }
    CHECK(count == 100000);
    const double variance = sum / static_cast<double>(count);
    CHECK(variance > 0.98);
    CHECK(variance < 1.02);
}

TEST_CASE("coherence blocks") {
    const ChannelBook book = draw_channels(1, 1, 1, 1, 50, 1);
    CHECK(book.block_of_slot(1) == 1);
    CHECK(book.block_of_slot(50) == 1);
    const ChannelBook multi = draw_channels(1, 1, 1, 3, 10, 1);
    CHECK(multi.block_of_slot(10) == 1);
    CHECK(multi.block_of_slot(11) == 2);
    CHECK(multi.block_of_slot(30) == 3);
}

TEST_CASE("mode streams are exchangeable") {
    const ChannelBook book = draw_channels(2, 3, 1, 10000, 1, 9);
    std::vector<double> s1, s2;
    for (long long q = 1; q <= 10000; ++q) {
        s1.push_back(book.vector(1, 1, q)[0].real());
        s2.push_back(book.vector(2, 3, q)[0].real());
    }
    CHECK(ks_distance(s1, s2) < 0.02);
}

TEST_CASE("receive applies the selected mode and noise stream") {
    const ChannelBook book = draw_channels(2, 2, 3, 1, 16, 3);
    Matrix zero(4, 3);
    std::vector<std::uint8_t> modes = {1, 2, 1, 2};
    const auto y0 = receive(book, 1, modes, zero, 0.0);
    for (const cplx& v : y0.samples) CHECK(v == cplx{});

    Matrix unit(4, 3);
    unit(2, 1) = 1.0;  // slot 3, antenna 2
    const auto y = receive(book, 1, modes, unit, 0.0);
    CHECK(y.samples[2] == book.vector(1, 1, 1)[1]);
    CHECK(y.samples[0] == cplx{});

    // noiseless receive is linear
    Matrix x1(4, 3), x2(4, 3);
    for (long long r = 0; r < 4; ++r)
        for (long long c = 0; c < 3; ++c) {
            x1(r, c) = cplx{double(r + 1), double(c)};
            x2(r, c) = cplx{double(c + 1), -double(r)};
        }
    const cplx alpha{2.0, 1.0}, beta{-1.0, 3.0};
    const auto lhs = receive(book, 2, modes, x1 * alpha + x2 * beta, 0.0);
    const auto y1 = receive(book, 2, modes, x1, 0.0);
    const auto y2 = receive(book, 2, modes, x2, 0.0);
    for (std::size_t t = 0; t < 4; ++t)
        CHECK(std::abs(lhs.samples[t] - (alpha * y1.samples[t] + beta * y2.samples[t])) < 1e-12);

    // distinct noise substreams; reproducible within one
    const auto n1 = receive(book, 1, modes, zero, 1.0, 1);
    const auto n1b = receive(book, 1, modes, zero, 1.0, 1);
    const auto n2 = receive(book, 1, modes, zero, 1.0, 2);
    CHECK(n1.samples == n1b.samples);
    CHECK(n1.samples != n2.samples);

    CHECK_THROWS_AS(receive(book, 1, modes, Matrix(3, 3), 0.0), parameter_error);
    CHECK_THROWS_AS(receive(book, 1, modes, Matrix(4, 2), 0.0), parameter_error);
    CHECK_THROWS_AS(receive(book, 1, modes, zero, -1.0), parameter_error);
    CHECK_THROWS_AS(draw_channels(0, 1, 1, 1, 1, 1), parameter_error);
}

TEST_CASE("scheme slot observation matches the coefficient row") {
    // slot 2 of the seven-slot scheme observes the (1,2,3,4)-weighted sum of
    // the per-message mode-1 combinations
    const auto p = bcgm::SchemeParams::make(4, 3, 2);
    const auto lambda = vandermonde_mds(3, 4);
    const bcgm::PrecoderGrid grid(p, lambda.base);
    std::vector<std::vector<cplx>> messages(4);
    for (int n = 0; n < 4; ++n)
        messages[static_cast<std::size_t>(n)] = {cplx{1.0, double(n)}, cplx{-0.5, 2.0 * n}};
    const Matrix x = bcgm::transmit_matrix(grid, messages);
    const ChannelBook book = draw_channels(4, 2, 2, 1, 7, 13);
    const auto sp = bcgm::switching_pattern_full(1, p);
    const auto y = receive(book, 1, sp.modes, x, 0.0);
    const auto h = book.vector(1, 1, 1);
    cplx expected{};
    for (int n = 0; n < 4; ++n) {
        const cplx combo = h[0] * messages[static_cast<std::size_t>(n)][0] +
                           h[1] * messages[static_cast<std::size_t>(n)][1];
        expected += cplx{double(n + 1), 0.0} * combo;
    }
    CHECK(std::abs(y.samples[1] - expected) < 1e-12);
}

TEST_CASE("stacked mode matrix is invertible almost surely") {
    for (const int m : {2, 3}) {
        int invertible = 0;
        for (int seed = 0; seed < 1000; ++seed) {
            const ChannelBook book = draw_channels(1, m, m, 1, 1, static_cast<std::uint64_t>(seed));
            const Matrix h = book.receiver_channel_matrix(1);
            const auto sv = singular_values(h);
            if (sv.front() / sv.back() < 1e8) ++invertible;
        }
        CHECK(invertible >= 999);
    }
    const ChannelBook book = draw_channels(2, 3, 4, 1, 1, 21);
    const Matrix h = book.receiver_channel_matrix(2);
    for (int m = 1; m <= 3; ++m) {
        const auto v = book.vector(2, m, 1);
        for (int a = 0; a < 4; ++a) CHECK(h(m - 1, a) == v[a]);
    }
}

TEST_CASE("power normalization") {
    Matrix unit(3, 2);
    for (long long r = 0; r < 3; ++r)
        for (long long c = 0; c < 2; ++c) unit(r, c) = 1.0;
    const auto [scaled1, s1] = power_normalize(unit, 1.0);
    CHECK(s1 == doctest::Approx(1.0));
    const auto [scaled4, s4] = power_normalize(unit, 4.0);
    CHECK(s4 == doctest::Approx(2.0));
    CHECK(s4 / s1 == doctest::Approx(std::sqrt(4.0)));

    // worst-slot superposition factor of the seven-slot scheme
    const auto p = bcgm::SchemeParams::make(4, 3, 2);
    const bcgm::PrecoderGrid grid(p, vandermonde_mds(3, 4).base);
    const double amp = grid.peak_amplification();
    CHECK(amp == doctest::Approx(std::sqrt(1 + 16 + 81 + 256)));  // third coefficient row dominates
    Matrix amps(1, 1);
    amps(0, 0) = amp;
    const auto [scaled, s] = power_normalize(amps, 1.0);
    CHECK(s == doctest::Approx(1.0 / amp));
    CHECK(std::abs(scaled(0, 0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(power_normalize(unit, 0.0), parameter_error);
}
