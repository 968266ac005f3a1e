#include <doctest.h>

#include <vector>

#include "bia/bcgm.hpp"
#include "bia/errors.hpp"
#include "bia/linalg.hpp"
#include "bia/simulate.hpp"

using namespace bia;
using namespace bia::bcgm;

namespace {

PrecoderGrid grid_for(const SchemeParams& p) {
    return PrecoderGrid(p, vandermonde_mds(p.per_rx_messages, p.num_messages).base);
}

std::vector<int> to_int(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("scheme parameter derivation") {
    const auto p432 = SchemeParams::make(4, 3, 2);
    CHECK(p432.num_messages == 4);
    CHECK(p432.per_rx_messages == 3);
    CHECK(p432.blocks == 1);
    CHECK(p432.streams == 2);
    CHECK(p432.slots == 7);

    const auto p313 = SchemeParams::make(3, 1, 3);
    CHECK(p313.blocks == 4);
    CHECK(p313.streams == 12);
    CHECK(p313.slots == 20);

    CHECK(SchemeParams::make(3, 2, 3).slots == 28);

    const auto m1 = SchemeParams::make(4, 2, 1);
    CHECK(m1.blocks == 1);
    CHECK(m1.round_slots == 0);
    CHECK(m1.slots == 6);  // one slot per message

    for (int K = 2; K <= 5; ++K)
        for (int G = 1; G <= K; ++G) {
            const auto p = SchemeParams::make(K, G, 2);
            CHECK(static_cast<long long>(p.per_rx_messages) * K ==
                  static_cast<long long>(G) * p.num_messages);
        }

    CHECK_THROWS_AS(SchemeParams::make(6, 3, 4), size_error);  // blocks blow past the slot cap
    CHECK_THROWS_AS(SchemeParams::make(4, 5, 2), parameter_error);
}

TEST_CASE("block schedule of the alignment rounds") {
    const auto p = SchemeParams::make(3, 1, 3);  // N_g = 3, M = 3, l = 4
    const std::vector<long long> f1 = {1, 1, 2, 2, 3, 3, 4, 4};
    const std::vector<long long> f2 = {1, 2, 1, 2, 3, 4, 3, 4};
    const std::vector<long long> f3 = {1, 2, 3, 4, 1, 2, 3, 4};
    for (long long t = 1; t <= 8; ++t) {
        CHECK(block_index(1, t, p) == f1[static_cast<std::size_t>(t - 1)]);
        CHECK(block_index(2, t, p) == f2[static_cast<std::size_t>(t - 1)]);
        CHECK(block_index(3, t, p) == f3[static_cast<std::size_t>(t - 1)]);
    }
    CHECK_THROWS_AS(block_index(1, 0, p), parameter_error);
    CHECK_THROWS_AS(block_index(1, 9, p), parameter_error);
}

TEST_CASE("selection matrix structure") {
    const auto p = SchemeParams::make(3, 2, 3);
    for (int n = 1; n <= p.num_messages; ++n) {
        const Matrix pi = selection_matrix(n, p);
        REQUIRE(pi.rows() == p.round_slots);
        REQUIRE(pi.cols() == p.blocks);
        for (long long r = 0; r < pi.rows(); ++r) {
            int ones = 0;
            for (long long c = 0; c < pi.cols(); ++c) {
                if (pi(r, c) == cplx{1.0, 0.0}) ++ones;
                else CHECK(pi(r, c) == cplx{});
            }
            CHECK(ones == 1);
        }
        for (long long c = 0; c < pi.cols(); ++c) {
            cplx sum{};
            for (long long r = 0; r < pi.rows(); ++r) sum += pi(r, c);
            CHECK(sum == cplx{2.0, 0.0});  // each block sent M-1 times per round
        }
    }
    const auto p2 = SchemeParams::make(4, 3, 2);
    const Matrix pi1 = selection_matrix(1, p2);
    CHECK((pi1 - Matrix::identity(1)).max_abs() == 0.0);
}

TEST_CASE("precoder stack layout matches the seven-slot scheme") {
    const auto p = SchemeParams::make(4, 3, 2);
    const auto lambda = vandermonde_mds(3, 4);
    // rows are (slot, antenna); columns the two streams of the message
    for (int n = 1; n <= 4; ++n) {
        const Matrix v = full_precoder(n, lambda.base, p);
        REQUIRE(v.rows() == 14);
        REQUIRE(v.cols() == 2);
        for (long long t = 1; t <= 3; ++t) {  // alignment rounds, scaled identity
            const cplx scale = lambda.base(t - 1, n - 1);
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c)
                    CHECK(v((t - 1) * 2 + a, c) == (a == c ? scale : cplx{}));
        }
        for (long long t = 4; t <= 7; ++t) {  // one message alone per slot
            const bool mine = (t - 3) == n;
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c)
                    CHECK(v((t - 1) * 2 + a, c) == (mine && a == c ? cplx{1.0, 0.0} : cplx{}));
        }
    }
}

TEST_CASE("precoder stack rounds carry the coefficient rows") {
    const auto p = SchemeParams::make(3, 2, 3);
    const auto lambda = vandermonde_mds(2, 3);
    const Matrix t_a = alignment_precoder(1, p);
    const Matrix v_a = full_precoder(1, lambda.base, p);
    const Matrix v_b = full_precoder(2, lambda.base, p);
    const Matrix t_b = alignment_precoder(2, p);
    // second round of message 1 is 1 * T_1, of message 2 is 2 * T_2
    for (long long r = 0; r < t_a.rows(); ++r)
        for (long long c = 0; c < t_a.cols(); ++c) {
            CHECK(v_a(t_a.rows() + r, c) == t_a(r, c));
            CHECK(v_b(t_b.rows() + r, c) == cplx{2.0, 0.0} * t_b(r, c));
        }
    const Matrix u_a = resolution_precoder(1, p);
    CHECK((u_a.conj_transpose() * u_a - Matrix::identity(p.streams)).max_abs() == 0.0);

    Matrix bad_lambda(2, 3);
    bad_lambda(0, 0) = 2.0;
    CHECK_THROWS_AS(full_precoder(1, bad_lambda, p), parameter_error);
    CHECK_THROWS_AS(full_precoder(1, Matrix(3, 3), p), parameter_error);
}

TEST_CASE("iterative switching patterns reproduce the worked example") {
    const auto p = SchemeParams::make(3, 2, 3);
    CHECK(to_int(first_phase_pattern({1, 2}, p)) == std::vector<int>{1, 2, 2, 1, 1, 2, 2, 1});
    CHECK(to_int(first_phase_pattern({1, 3}, p)) == std::vector<int>{1, 2, 1, 2, 2, 1, 2, 1});
    CHECK(to_int(first_phase_pattern({2, 3}, p)) == std::vector<int>{1, 1, 2, 2, 2, 2, 1, 1});

    const auto p2 = SchemeParams::make(4, 3, 2);
    for (int k = 1; k <= 4; ++k)
        CHECK(to_int(first_phase_pattern(desired_indices(k, p2.groups), p2)) == std::vector<int>{1});
}

TEST_CASE("alignment verification") {
    const auto p = SchemeParams::make(3, 2, 3);
    for (int k = 1; k <= 3; ++k) {
        const auto desired = desired_indices(k, p.groups);
        CHECK(verify_alignment(first_phase_pattern(desired, p), desired, p).pass);
    }

    // the conventional single-destination pattern
    const auto p313 = SchemeParams::make(3, 1, 3);
    const std::vector<std::uint8_t> alt = {1, 2, 1, 2, 1, 2, 1, 2};
    CHECK(verify_alignment(alt, {1}, p313).pass);

    // breaking the constancy of the undesired third message is caught there
    auto broken = first_phase_pattern({1, 2}, p);
    broken[4] = 2;  // slot 5 must repeat slot 1
    const auto verdict = verify_alignment(broken, {1, 2}, p);
    REQUIRE_FALSE(verdict.pass);
    CHECK(verdict.message == 3);
    CHECK(verdict.h == 0);
    CHECK(verdict.j == 1);

    std::vector<std::uint8_t> out_of_range = {1, 3, 2, 1, 1, 2, 2, 1};
    CHECK_FALSE(verify_alignment(out_of_range, {1, 2}, p).pass);
}

TEST_CASE("algorithm output passes alignment over a small grid") {
    for (int K = 2; K <= 4; ++K)
        for (int G = 1; G <= K; ++G)
            for (int M = 2; M <= 4; ++M) {
                const auto p = SchemeParams::make(K, G, M);
                for (int k = 1; k <= K; ++k) {
                    const auto desired = desired_indices(k, p.groups);
                    const auto verdict = verify_alignment(first_phase_pattern(desired, p), desired, p);
                    CHECK_MESSAGE(verdict.pass, "K=", K, " G=", G, " M=", M, " k=", k, ": ",
                                  verdict.detail);
                }
            }
}

TEST_CASE("full switching patterns") {
    const auto p432 = SchemeParams::make(4, 3, 2);
    const std::vector<std::vector<int>> fig2 = {
        {1, 1, 1, 2, 2, 2, 1},
        {1, 1, 1, 2, 2, 1, 2},
        {1, 1, 1, 2, 1, 2, 2},
        {1, 1, 1, 1, 2, 2, 2},
    };
    for (int k = 1; k <= 4; ++k)
        CHECK(to_int(switching_pattern_full(k, p432).modes) == fig2[static_cast<std::size_t>(k - 1)]);

    const auto p323 = SchemeParams::make(3, 2, 3);
    const auto sp1 = switching_pattern_full(1, p323);
    const std::vector<int> modes1 = to_int(sp1.modes);
    const std::vector<int> tail(modes1.begin() + 16, modes1.end());
    CHECK(tail == std::vector<int>{3, 3, 3, 3, 3, 3, 3, 3, 1, 2, 2, 1});

    // interference modes agree with the first phase at every repeat
    for (long long l = 1; l <= 4; ++l)
        CHECK(interference_mode(sp1.first_phase, 3, l, p323) ==
              std::vector<int>{1, 2, 2, 1}[static_cast<std::size_t>(l - 1)]);
}

TEST_CASE("mode-selection matrices and their ranks") {
    const auto p = SchemeParams::make(4, 3, 2);
    const auto grid = grid_for(p);
    const auto sp1 = switching_pattern_full(1, p);

    Matrix stacked;
    bool first = true;
    for (int n = 1; n <= 4; ++n) {
        const Matrix e = effective_mode_matrix(sp1, n, grid);
        const bool desired = p.groups.contains(n, 1);
        CHECK(numeric_rank(e) == (desired ? 2 : 1));
        CHECK(structural_rank(sp1, n, grid) == numeric_rank(e));
        stacked = first ? e : stacked.hcat(e);
        first = false;
        // resolution slots of other messages leave zero rows
        const long long other_slot = resolution_slot(n == 1 ? 2 : 1, 1, p);
        const ModeEntry entry = effective_mode_entry(sp1, n, other_slot, grid);
        CHECK_FALSE(entry.nonzero);
    }
    CHECK(numeric_rank(stacked) == 7);
    CHECK(union_structural_rank(sp1, grid) == 7);
}

TEST_CASE("structural union rank agrees with the dense route") {
    const int combos[][3] = {{3, 1, 3}, {3, 2, 3}, {4, 2, 2}, {4, 3, 3}, {5, 4, 2}};
    for (const auto& combo : combos) {
        const int K = combo[0], G = combo[1], M = combo[2];
        const auto p = SchemeParams::make(K, G, M);
        const auto grid = grid_for(p);
        for (int k = 1; k <= K; ++k) {
            const auto sp = switching_pattern_full(k, p);
            Matrix stacked;
            long long total = 0;
            for (int n = 1; n <= p.num_messages; ++n) {
                const Matrix e = effective_mode_matrix(sp, n, grid);
                CHECK(structural_rank(sp, n, grid) == numeric_rank(e));
                total += structural_rank(sp, n, grid);
                stacked = n == 1 ? e : stacked.hcat(e);
            }
            CHECK(total == p.slots);
            CHECK(union_structural_rank(sp, grid) == numeric_rank(stacked));
        }
    }
}

TEST_CASE("decoders satisfy the zero-forcing identities") {
    const int combos[][3] = {{4, 3, 2}, {3, 1, 3}, {3, 2, 3}};
    for (const auto& combo : combos) {
        const int K = combo[0], G = combo[1], M = combo[2];
        const auto p = SchemeParams::make(K, G, M);
        const auto grid = grid_for(p);
        for (int k = 1; k <= K; ++k) {
            const auto sp = switching_pattern_full(k, p);
            const auto desired = desired_indices(k, p.groups);
            const auto dense = decoder_matrices(k, sp, grid);
            REQUIRE(dense.size() == desired.size());
            for (std::size_t i = 0; i < desired.size(); ++i) {
                const Matrix dt = dense[i].transpose();
                for (int n = 1; n <= p.num_messages; ++n) {
                    const Matrix prod = dt * effective_mode_matrix(sp, n, grid);
                    const Matrix expected =
                        n == desired[i] ? Matrix::identity(p.streams) : Matrix(p.streams, p.streams);
                    CHECK((prod - expected).max_abs() < 1e-9);
                }
                // the structured decoder solves the same (unique) system
                const auto sparse = structured_decoder(k, desired[i], sp, grid);
                CHECK((sparse.dense_transposed(p.slots) - dt).max_abs() < 1e-8);
                for (int n = 1; n <= p.num_messages; ++n)
                    CHECK(decoder_residual(sparse, sp, n, grid) < 1e-10);
            }
        }
    }
}

TEST_CASE("mismatched pattern is rejected as an alignment violation") {
    const auto p = SchemeParams::make(3, 2, 3);
    const auto grid = grid_for(p);
    const auto sp3 = switching_pattern_full(3, p);  // receiver 3's pattern ...
    CHECK_THROWS_AS(decoder_matrices(1, sp3, grid), alignment_error);  // ... used by receiver 1
    CHECK_THROWS_AS(structured_decoder(1, 1, sp3, grid), alignment_error);
    CHECK_THROWS_AS(structured_decoder(1, 3, sp3, grid), membership_error);
}

TEST_CASE("scheme dimension accounting") {
    const auto d432 = scheme_dimensions(SchemeParams::make(4, 3, 2));
    CHECK(d432.slots == 7);
    CHECK(d432.dof_message == Rational(2, 7));
    CHECK(d432.dof_sum == Rational(8, 7));

    const auto d313 = scheme_dimensions(SchemeParams::make(3, 1, 3));
    CHECK(d313.slots == 20);
    CHECK(d313.streams == 12);
    CHECK(d313.dof_message == Rational(3, 5));

    CHECK(scheme_dimensions(SchemeParams::make(3, 2, 3)).slots == 28);
    CHECK(scheme_dimensions(SchemeParams::make(5, 2, 1)).dof_sum == Rational(1, 1));
}

TEST_CASE("transmit matrix reproduces the scheme rows") {
    const auto p = SchemeParams::make(4, 3, 2);
    const auto grid = grid_for(p);
    std::vector<std::vector<cplx>> messages(4);
    for (int n = 0; n < 4; ++n)
        messages[static_cast<std::size_t>(n)] = {cplx{double(n + 1), 0.0}, cplx{double(n + 1), 1.0}};
    const Matrix x = bcgm::transmit_matrix(grid, messages);
    REQUIRE(x.rows() == 7);
    REQUIRE(x.cols() == 2);
    // slot 2 applies the second coefficient row (1, 2, 3, 4)
    cplx expected{};
    for (int n = 0; n < 4; ++n) expected += cplx{double(n + 1), 0.0} * messages[static_cast<std::size_t>(n)][0];
    CHECK(std::abs(x(1, 0) - expected) < 1e-12);
    // slot 4 carries message 1 alone
    CHECK(x(3, 0) == messages[0][0]);
    CHECK(x(3, 1) == messages[0][1]);
}

TEST_CASE("single-mode scheme degenerates to orthogonal multicast") {
    const auto p = SchemeParams::make(4, 2, 1);
    const auto grid = grid_for(p);
    for (int k = 1; k <= 4; ++k) {
        const auto sp = switching_pattern_full(k, p);
        CHECK(sp.first_phase.empty());
        for (const auto m : sp.modes) CHECK(m == 1);
        for (int n = 1; n <= p.num_messages; ++n) CHECK(structural_rank(sp, n, grid) == 1);
        CHECK(union_structural_rank(sp, grid) == p.slots);
        for (int n : desired_indices(k, p.groups)) {
            const auto dec = structured_decoder(k, n, sp, grid);
            for (int target = 1; target <= p.num_messages; ++target)
                CHECK(decoder_residual(dec, sp, target, grid) == 0.0);
        }
    }
}

TEST_CASE("any pattern satisfying the alignment condition decodes") {
    // a feasible first phase that the iterative construction does not emit
    const auto p = SchemeParams::make(3, 2, 3);
    const std::vector<std::uint8_t> alt = {2, 1, 1, 2, 2, 1, 1, 2};
    const std::vector<int> desired = {1, 2};  // receiver 1
    REQUIRE(verify_alignment(alt, desired, p).pass);

    SwitchingPattern sp;
    sp.receiver = 1;
    sp.first_phase = alt;
    sp.modes.resize(static_cast<std::size_t>(p.slots));
    for (int v = 0; v < p.per_rx_messages; ++v)
        std::copy(alt.begin(), alt.end(), sp.modes.begin() + v * p.round_slots);
    for (int n = 1; n <= p.num_messages; ++n)
        for (long long l = 1; l <= p.blocks; ++l)
            sp.modes[static_cast<std::size_t>(resolution_slot(n, l, p) - 1)] =
                std::binary_search(desired.begin(), desired.end(), n)
                    ? static_cast<std::uint8_t>(p.modes)
                    : interference_mode(alt, n, l, p);

    const auto grid = grid_for(p);
    CHECK(union_structural_rank(sp, grid) == p.slots);
    for (int n : desired) {
        const auto dec = structured_decoder(1, n, sp, grid);
        for (int target = 1; target <= p.num_messages; ++target)
            CHECK(decoder_residual(dec, sp, target, grid) < 1e-10);
    }
}

TEST_CASE("noiseless recovery across a small grid") {
    for (int K = 2; K <= 4; ++K)
        for (int G = 1; G <= K; ++G)
            for (int M = 1; M <= 3; ++M) {
                const auto report = sim::run_bcgm(K, G, M, 42, 0.0, false);
                CHECK_MESSAGE(report.worst_rel_error < 1e-8, "K=", K, " G=", G, " M=", M);
            }
}
