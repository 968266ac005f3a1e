#include "bia/usi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bia/errors.hpp"
#include "bia/linalg.hpp"

namespace bia::usi {

const MessageInfo& UsiMessageTable::info(int n, int g) const {
    if (n < 1 || n > groups.group_count() || g < 1 || g > group_size)
        throw parameter_error("UsiMessageTable::info: index out of range");
    return messages[static_cast<std::size_t>(flat(n, g))];
}

int effective_modes(int group_size, int modes) {
    if (group_size < 2) throw parameter_error("effective_modes: side information needs G >= 2");
    if (modes < 1) throw parameter_error("effective_modes: need M >= 1");
    return std::min(group_size - 1, modes);
}

int effective_modes_bcgm(int modes_tx, int modes_rx) {
    if (modes_tx < 1 || modes_rx < 1) throw parameter_error("effective_modes_bcgm: need modes >= 1");
    return std::min(modes_tx, modes_rx);
}

UsiMessageTable build_table(int K, int G, int M) {
    UsiMessageTable table;
    table.users = K;
    table.group_size = G;
    table.modes = M;
    table.effective = effective_modes(G, M);
    table.groups = ordered_subsets(K, G);
    table.messages.reserve(static_cast<std::size_t>(table.groups.group_count()) * G);
    for (int n = 1; n <= table.groups.group_count(); ++n) {
        const std::vector<int>& group = table.groups.group(n);
        for (int g = 1; g <= G; ++g) {
            MessageInfo info;
            info.super_message = n;
            info.position = g;
            info.destination = group[static_cast<std::size_t>(g - 1)];
            for (int member : group) {
                if (member != info.destination) info.knowing_txs.push_back(member);
            }
            info.support.assign(info.knowing_txs.begin(),
                                info.knowing_txs.begin() + table.effective);
            table.messages.push_back(std::move(info));
        }
    }
    return table;
}

std::vector<int> tx_support(int n, int g, const UsiMessageTable& table) {
    return table.info(n, g).support;
}

std::pair<int, int> RelabelMap::to_mapreduce(int n, int g) const {
    const std::vector<int>& group = groups.group(n);
    const int dest = group[static_cast<std::size_t>(g - 1)];
    std::vector<int> file_set;
    file_set.reserve(group.size() - 1);
    for (int member : group) {
        if (member != dest) file_set.push_back(member);
    }
    return {files.group_index(file_set), dest};
}

std::pair<int, int> RelabelMap::to_usi(int file_index, int destination) const {
    std::vector<int> members = files.group(file_index);
    if (std::binary_search(members.begin(), members.end(), destination))
        throw parameter_error("relabel: destination already holds the file");
    members.push_back(destination);
    std::sort(members.begin(), members.end());
    const int n = groups.group_index(members);
    return {n, member_position(n, destination, groups)};
}

RelabelMap relabel_mapreduce_to_usi(int K, int r) {
    if (r < 1 || r > K - 1) throw parameter_error("relabel: need 1 <= r <= K-1");
    RelabelMap map;
    map.users = K;
    map.load = r;
    map.files = ordered_subsets(K, r);
    map.groups = ordered_subsets(K, r + 1);
    return map;
}

Matrix distributed_signal(int n, int g, std::span<const cplx> w, const Matrix& v_n,
                          const std::vector<int>& support, int users) {
    const long long streams = v_n.cols();
    if (static_cast<long long>(w.size()) != streams)
        throw parameter_error("distributed_signal: symbol count must match the precoder width");
    if (v_n.rows() % static_cast<long long>(support.size()) != 0)
        throw parameter_error("distributed_signal: precoder height not divisible by the support size");
    const long long antennas = static_cast<long long>(support.size());
    const long long slots = v_n.rows() / antennas;
    Matrix x(slots, users);
    for (long long t = 0; t < slots; ++t) {
        for (long long a = 0; a < antennas; ++a) {
            cplx acc{};
            const cplx* row = v_n.row_ptr(t * antennas + a);
            for (long long c = 0; c < streams; ++c) acc += row[c] * w[static_cast<std::size_t>(c)];
            x(t, support[static_cast<std::size_t>(a)] - 1) = acc;
        }
    }
    (void)n;
    (void)g;
    return x;
}

Matrix transmit_all(const UsiMessageTable& table, const bcgm::PrecoderGrid& grid,
                    const MessageMatrix& messages,
                    const std::vector<std::vector<int>>* routing_override) {
    const bcgm::SchemeParams& p = grid.params();
    if (p.modes != table.effective)
        throw parameter_error("transmit_all: grid modes must equal the effective mode count");
    if (static_cast<int>(messages.size()) != table.message_count())
        throw parameter_error("transmit_all: need one symbol vector per message");
    struct Leg {
        std::size_t msg;
        int super_message;
        int antenna;  // 0-based position within the support
    };
    std::vector<std::vector<Leg>> legs(static_cast<std::size_t>(table.users) + 1);
    for (int n = 1; n <= table.groups.group_count(); ++n) {
        for (int g = 1; g <= table.group_size; ++g) {
            const MessageInfo& info = table.info(n, g);
            const std::vector<int>& support =
                routing_override ? (*routing_override)[static_cast<std::size_t>(table.flat(n, g))]
                                 : info.support;
            if (static_cast<int>(support.size()) != table.effective)
                throw parameter_error("transmit_all: support size must equal the effective mode count");
            for (std::size_t a = 0; a < support.size(); ++a) {
                const int tx = support[a];
                if (!std::binary_search(info.knowing_txs.begin(), info.knowing_txs.end(), tx))
                    throw encoding_error("transmit_all: Tx-" + std::to_string(tx) +
                                         " does not hold message (" + std::to_string(n) + "," +
                                         std::to_string(g) + ")");
                legs[static_cast<std::size_t>(tx)].push_back(
                    {static_cast<std::size_t>(table.flat(n, g)), n, static_cast<int>(a)});
            }
            if (static_cast<long long>(messages[static_cast<std::size_t>(table.flat(n, g))].size()) !=
                p.streams)
                throw parameter_error("transmit_all: each message must carry L = M'*l symbols");
        }
    }
    Matrix x(p.slots, table.users);
    for (long long t = 1; t <= p.slots; ++t) {
        for (int tx = 1; tx <= table.users; ++tx) {
            cplx acc{};
            for (const Leg& leg : legs[static_cast<std::size_t>(tx)]) {
                const bcgm::PrecoderGrid::Slot s = grid.slot_of(leg.super_message, t);
                if (s.block == 0) continue;
                acc += s.coeff *
                       messages[leg.msg][static_cast<std::size_t>((s.block - 1) * p.modes + leg.antenna)];
            }
            x(t - 1, tx - 1) = acc;
        }
    }
    return x;
}

Matrix block_channel(const ChannelBook& book, int k, const MessageInfo& info, int effective,
                     long long q) {
    Matrix h(effective, static_cast<long long>(info.support.size()));
    for (int m = 1; m <= effective; ++m) {
        const auto v = book.vector(k, m, q);
        for (std::size_t a = 0; a < info.support.size(); ++a)
            h(m - 1, static_cast<long long>(a)) = v[static_cast<std::size_t>(info.support[a] - 1)];
    }
    return h;
}

namespace {

double condition_estimate(const Matrix& h) {
    const std::vector<double> sv = singular_values(h);
    if (sv.empty() || sv.back() == 0.0) return std::numeric_limits<double>::infinity();
    return sv.front() / sv.back();
}

}  // namespace

std::vector<DecodedMessage> decode(int k, std::span<const cplx> y, const UsiMessageTable& table,
                                   const bcgm::PrecoderGrid& grid,
                                   const std::vector<bcgm::SparseDecoder>& decoders,
                                   const MessageMatrix& side_info, const ChannelBook& book,
                                   long long q) {
    const bcgm::SchemeParams& p = grid.params();
    const std::vector<int> desired = desired_indices(k, table.groups);
    if (decoders.size() != desired.size())
        throw parameter_error("decode: need one decoder per desired super-message");
    std::vector<DecodedMessage> out;
    out.reserve(desired.size());
    for (std::size_t i = 0; i < desired.size(); ++i) {
        const int n = desired[i];
        const int g_self = member_position(n, k, table.groups);
        std::vector<cplx> projected = decoders[i].apply(y);
        // subtract the side-information contributions through the known channels
        for (int g = 1; g <= table.group_size; ++g) {
            if (g == g_self) continue;
            const std::vector<cplx>& w = side_info[static_cast<std::size_t>(table.flat(n, g))];
            if (static_cast<long long>(w.size()) != p.streams)
                throw decoding_error("decode: receiver " + std::to_string(k) +
                                     " lacks side information for message (" + std::to_string(n) +
                                     "," + std::to_string(g) + ")");
            const Matrix h = block_channel(book, k, table.info(n, g), table.effective, q);
            for (long long l = 0; l < p.blocks; ++l) {
                for (int r = 0; r < table.effective; ++r) {
                    cplx acc{};
                    for (int c = 0; c < table.effective; ++c)
                        acc += h(r, c) * w[static_cast<std::size_t>(l * table.effective + c)];
                    projected[static_cast<std::size_t>(l * table.effective + r)] -= acc;
                }
            }
        }
        const MessageInfo& self = table.info(n, g_self);
        const Matrix h_self = block_channel(book, k, self, table.effective, q);
        DecodedMessage dm;
        dm.super_message = n;
        dm.position = g_self;
        dm.condition = condition_estimate(h_self);
        dm.conditioning_warning = !(dm.condition < 1e8);
        dm.symbols = bcgm::invert_blocks(projected, inverse(h_self));
        out.push_back(std::move(dm));
    }
    return out;
}

double peak_amplification(const UsiMessageTable& table, const bcgm::PrecoderGrid& grid) {
    const bcgm::SchemeParams& p = grid.params();
    // legs per transmitter: (super-message, count of carried positions)
    std::vector<std::vector<int>> super_count(static_cast<std::size_t>(table.users) + 1,
                                              std::vector<int>(static_cast<std::size_t>(p.num_messages) + 1, 0));
    for (const MessageInfo& info : table.messages) {
        for (int tx : info.support)
            ++super_count[static_cast<std::size_t>(tx)][static_cast<std::size_t>(info.super_message)];
    }
    double peak2 = 1.0;
    for (int tx = 1; tx <= table.users; ++tx) {
        for (long long v = 0; v < grid.lambda().rows(); ++v) {
            double sum = 0.0;
            for (int n = 1; n <= p.num_messages; ++n)
                sum += std::norm(grid.lambda()(v, n - 1)) *
                       super_count[static_cast<std::size_t>(tx)][static_cast<std::size_t>(n)];
            if (p.round_slots > 0) peak2 = std::max(peak2, sum);
        }
        for (int n = 1; n <= p.num_messages; ++n)
            peak2 = std::max(peak2, static_cast<double>(super_count[static_cast<std::size_t>(tx)][static_cast<std::size_t>(n)]));
    }
    return std::sqrt(peak2);
}

std::vector<std::vector<M1Assignment>> m1_schedule(int K, int G) {
    if (G < 2) throw parameter_error("m1_schedule: side information needs G >= 2");
    const GroupTable groups = ordered_subsets(K, G);
    std::vector<std::vector<M1Assignment>> schedule(static_cast<std::size_t>(groups.group_count()));
    for (int n = 1; n <= groups.group_count(); ++n) {
        const std::vector<int>& group = groups.group(n);
        auto& slot = schedule[static_cast<std::size_t>(n - 1)];
        slot.reserve(static_cast<std::size_t>(G));
        for (int g = 1; g <= G; ++g) {
            // the next member cyclically holds W_{n,g} and is free this slot
            const int tx = group[static_cast<std::size_t>(mod1(g + 1, G) - 1)];
            slot.push_back({n, g, tx});
        }
    }
    return schedule;
}

Matrix m1_transmit(const UsiMessageTable& table, const MessageMatrix& messages, long long sym) {
    const auto schedule = m1_schedule(table.users, table.group_size);
    Matrix x(static_cast<long long>(schedule.size()), table.users);
    for (std::size_t slot = 0; slot < schedule.size(); ++slot) {
        for (const M1Assignment& a : schedule[slot]) {
            const std::vector<cplx>& w =
                messages[static_cast<std::size_t>(table.flat(a.super_message, a.position))];
            if (sym >= static_cast<long long>(w.size()))
                throw parameter_error("m1_transmit: symbol index out of range");
            x(static_cast<long long>(slot), a.transmitter - 1) = w[static_cast<std::size_t>(sym)];
        }
    }
    return x;
}

std::vector<DecodedMessage> m1_decode(int k, std::span<const cplx> y, const UsiMessageTable& table,
                                      const MessageMatrix& side_info, long long sym,
                                      const ChannelBook& book, long long q) {
    const auto schedule = m1_schedule(table.users, table.group_size);
    const std::vector<int> desired = desired_indices(k, table.groups);
    const auto h = book.vector(k, 1, q);
    std::vector<DecodedMessage> out;
    out.reserve(desired.size());
    for (int n : desired) {
        const int g_self = member_position(n, k, table.groups);
        cplx acc = y[static_cast<std::size_t>(n - 1)];
        cplx self_gain{};
        for (const M1Assignment& a : schedule[static_cast<std::size_t>(n - 1)]) {
            const cplx gain = h[static_cast<std::size_t>(a.transmitter - 1)];
            if (a.position == g_self) {
                self_gain = gain;
                continue;
            }
            const std::vector<cplx>& w =
                side_info[static_cast<std::size_t>(table.flat(a.super_message, a.position))];
            if (sym >= static_cast<long long>(w.size()))
                throw decoding_error("m1_decode: receiver " + std::to_string(k) +
                                     " lacks side information for message (" + std::to_string(n) + "," +
                                     std::to_string(a.position) + ")");
            acc -= gain * w[static_cast<std::size_t>(sym)];
        }
        DecodedMessage dm;
        dm.super_message = n;
        dm.position = g_self;
        dm.condition = self_gain == cplx{} ? std::numeric_limits<double>::infinity()
                                           : 1.0 / std::abs(self_gain);
        dm.conditioning_warning = !(std::abs(self_gain) > 1e-8);
        dm.symbols = {acc / self_gain};
        out.push_back(std::move(dm));
    }
    return out;
}

}  // namespace bia::usi
