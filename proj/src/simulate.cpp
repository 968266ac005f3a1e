#include "bia/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "bia/errors.hpp"
#include "bia/linalg.hpp"
#include "bia/rng.hpp"

namespace bia::sim {
namespace {

constexpr std::uint64_t kMessageTag = 0x6d736773;

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
}

double relative_error(const std::vector<cplx>& got, const std::vector<cplx>& want) {
    double err = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(got[i] - want[i]));
    const double scale = max_abs(want);
    return scale > 0 ? err / scale : err;
}

void attach_diagnostics(ReceiverReport& rep, const bcgm::SwitchingPattern& pattern,
                        const bcgm::PrecoderGrid& grid,
                        const std::vector<bcgm::SparseDecoder>& decoders) {
    const auto& p = grid.params();
    rep.family_ranks.clear();
    for (int n = 1; n <= p.num_messages; ++n)
        rep.family_ranks.push_back(bcgm::structural_rank(pattern, n, grid));
    rep.union_rank = bcgm::union_structural_rank(pattern, grid);
    double worst = 0.0;
    for (const auto& dec : decoders) {
        for (int target = 1; target <= p.num_messages; ++target)
            worst = std::max(worst, bcgm::decoder_residual(dec, pattern, target, grid));
    }
    rep.worst_decoder_residual = worst;
}

}  // namespace

std::vector<cplx> random_symbols(std::uint64_t seed, std::uint64_t stream, long long count) {
    const RandomStream s = RandomStream(seed).fork({kMessageTag, stream});
    std::vector<cplx> out(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = s.cnormal(static_cast<std::uint64_t>(i));
    return out;
}

DecodingReport run_bcgm(int K, int G, int M, std::uint64_t seed, double sigma2, bool diagnostics) {
    const auto params = bcgm::SchemeParams::make(K, G, M);
    const auto lambda = vandermonde_mds(params.per_rx_messages, params.num_messages);
    const bcgm::PrecoderGrid grid(params, lambda.base);

    std::vector<std::vector<cplx>> messages(static_cast<std::size_t>(params.num_messages));
    for (int n = 1; n <= params.num_messages; ++n)
        messages[static_cast<std::size_t>(n - 1)] =
            random_symbols(seed, static_cast<std::uint64_t>(n), params.streams);

    const Matrix x = bcgm::transmit_matrix(grid, messages);
    const ChannelBook book = draw_channels(K, M, M, 1, params.slots, seed);

    DecodingReport report;
    report.setting = "bcgm";
    report.users = K;
    report.group_size = G;
    report.modes = M;
    report.effective_modes = M;
    report.blocks = params.blocks;
    report.streams = params.streams;
    report.slots = params.slots;
    const auto dims = bcgm::scheme_dimensions(params);
    report.dof_message = dims.dof_message.str();
    report.dof_sum = dims.dof_sum.str();
    report.sigma2 = sigma2;
    report.seed = seed;

    for (int k = 1; k <= K; ++k) {
        const auto pattern = bcgm::switching_pattern_full(k, params);
        const std::vector<int> desired = desired_indices(k, params.groups);
        std::vector<bcgm::SparseDecoder> decoders;
        decoders.reserve(desired.size());
        for (int n : desired) decoders.push_back(bcgm::structured_decoder(k, n, pattern, grid));

        const ReceivedSignal y = receive(book, k, pattern.modes, x, sigma2, 0);
        const Matrix h_inv = inverse(book.receiver_channel_matrix(k));

        ReceiverReport rep;
        rep.receiver = k;
        for (std::size_t i = 0; i < desired.size(); ++i) {
            const auto projected = decoders[i].apply(y.samples);
            const auto recovered = bcgm::invert_blocks(projected, h_inv);
            MessageReport mr;
            mr.message = desired[i];
            mr.max_rel_error =
                relative_error(recovered, messages[static_cast<std::size_t>(desired[i] - 1)]);
            rep.messages.push_back(mr);
            report.worst_rel_error = std::max(report.worst_rel_error, mr.max_rel_error);
        }
        if (diagnostics) attach_diagnostics(rep, pattern, grid, decoders);
        report.receivers.push_back(std::move(rep));
    }
    return report;
}

DecodingReport run_usi(int K, int G, int M, std::uint64_t seed, double sigma2, bool diagnostics) {
    if (G == 1) {
        // no side information to exploit; the groupcast scheme with singleton
        // groups is the degenerate equivalent
        DecodingReport report = run_bcgm(K, 1, M, seed, sigma2, diagnostics);
        report.setting = "usi";
        return report;
    }
    const int m_eff = usi::effective_modes(G, M);
    const auto table = usi::build_table(K, G, M);

    DecodingReport report;
    report.setting = "usi";
    report.users = K;
    report.group_size = G;
    report.modes = M;
    report.effective_modes = m_eff;
    report.sigma2 = sigma2;
    report.seed = seed;

    if (m_eff == 1) {
        // one symbol per message, one slot per super-message
        const long long n_g = table.groups.group_count();
        usi::MessageMatrix messages(static_cast<std::size_t>(table.message_count()));
        for (int i = 0; i < table.message_count(); ++i)
            messages[static_cast<std::size_t>(i)] = random_symbols(seed, static_cast<std::uint64_t>(i + 1), 1);
        const Matrix x = usi::m1_transmit(table, messages, 0);
        const ChannelBook book = draw_channels(K, std::max(M, 1), K, 1, n_g, seed);
        report.blocks = 1;
        report.streams = 1;
        report.slots = n_g;
        report.dof_message = Rational(1, n_g).str();
        report.dof_sum = Rational(G, 1).str();
        std::vector<std::uint8_t> all_mode_one(static_cast<std::size_t>(n_g), 1);
        for (int k = 1; k <= K; ++k) {
            const ReceivedSignal y = receive(book, k, all_mode_one, x, sigma2, 0);
            usi::MessageMatrix side(static_cast<std::size_t>(table.message_count()));
            for (int n : desired_indices(k, table.groups)) {
                const int g_self = member_position(n, k, table.groups);
                for (int g = 1; g <= G; ++g) {
                    if (g != g_self)
                        side[static_cast<std::size_t>(table.flat(n, g))] =
                            messages[static_cast<std::size_t>(table.flat(n, g))];
                }
            }
            const auto decoded = usi::m1_decode(k, y.samples, table, side, 0, book);
            ReceiverReport rep;
            rep.receiver = k;
            for (const auto& dm : decoded) {
                MessageReport mr;
                mr.message = dm.super_message;
                mr.position = dm.position;
                mr.conditioning_warning = dm.conditioning_warning;
                mr.max_rel_error = relative_error(
                    dm.symbols,
                    messages[static_cast<std::size_t>(table.flat(dm.super_message, dm.position))]);
                rep.messages.push_back(mr);
                report.worst_rel_error = std::max(report.worst_rel_error, mr.max_rel_error);
            }
            report.receivers.push_back(std::move(rep));
        }
        return report;
    }

    const auto params = bcgm::SchemeParams::make(K, G, m_eff);
    const auto lambda = vandermonde_mds(params.per_rx_messages, params.num_messages);
    const bcgm::PrecoderGrid grid(params, lambda.base);
    report.blocks = params.blocks;
    report.streams = params.streams;
    report.slots = params.slots;
    const auto dims = bcgm::scheme_dimensions(params);
    report.dof_message = dims.dof_message.str();
    report.dof_sum = (Rational(G, 1) * dims.dof_sum).str();

    usi::MessageMatrix messages(static_cast<std::size_t>(table.message_count()));
    for (int i = 0; i < table.message_count(); ++i)
        messages[static_cast<std::size_t>(i)] =
            random_symbols(seed, static_cast<std::uint64_t>(i + 1), params.streams);

    const Matrix x = usi::transmit_all(table, grid, messages);
    const ChannelBook book = draw_channels(K, std::max(M, m_eff), K, 1, params.slots, seed);

    for (int k = 1; k <= K; ++k) {
        const auto pattern = bcgm::switching_pattern_full(k, params);
        const std::vector<int> desired = desired_indices(k, params.groups);
        std::vector<bcgm::SparseDecoder> decoders;
        decoders.reserve(desired.size());
        for (int n : desired) decoders.push_back(bcgm::structured_decoder(k, n, pattern, grid));

        const ReceivedSignal y = receive(book, k, pattern.modes, x, sigma2, 0);
        usi::MessageMatrix side(static_cast<std::size_t>(table.message_count()));
        for (int n : desired) {
            const int g_self = member_position(n, k, table.groups);
            for (int g = 1; g <= G; ++g) {
                if (g != g_self)
                    side[static_cast<std::size_t>(table.flat(n, g))] =
                        messages[static_cast<std::size_t>(table.flat(n, g))];
            }
        }
        const auto decoded = usi::decode(k, y.samples, table, grid, decoders, side, book);

        ReceiverReport rep;
        rep.receiver = k;
        for (const auto& dm : decoded) {
            MessageReport mr;
            mr.message = dm.super_message;
            mr.position = dm.position;
            mr.conditioning_warning = dm.conditioning_warning;
            mr.max_rel_error = relative_error(
                dm.symbols,
                messages[static_cast<std::size_t>(table.flat(dm.super_message, dm.position))]);
            rep.messages.push_back(mr);
            report.worst_rel_error = std::max(report.worst_rel_error, mr.max_rel_error);
        }
        if (diagnostics) attach_diagnostics(rep, pattern, grid, decoders);
        report.receivers.push_back(std::move(rep));
    }
    return report;
}

}  // namespace bia::sim
