#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bia/bcgm.hpp"
#include "bia/channel.hpp"
#include "bia/combinatorics.hpp"
#include "bia/matrix.hpp"

namespace bia::usi {

/// One unicast message W_{n,g}: g-th member of group S_n is the destination,
/// the other members hold it (and transmit it); the first min(M, G-1) holders
/// simulate the groupcast transmit antennas.
struct MessageInfo {
    int super_message = 0;  // n
    int position = 0;       // g
    int destination = 0;    // S_n(g)
    std::vector<int> knowing_txs;  // S_n minus the destination, ascending
    std::vector<int> support;      // first min(M, G-1) of knowing_txs
};

struct UsiMessageTable {
    int users = 0;       // K
    int group_size = 0;  // G
    int modes = 0;       // requested M
    int effective = 0;   // M' = min(G-1, M)
    GroupTable groups{0, 0, {}};
    std::vector<MessageInfo> messages;  // (n-1)*G + (g-1)

    const MessageInfo& info(int n, int g) const;
    int message_count() const { return static_cast<int>(messages.size()); }
    long long flat(int n, int g) const { return static_cast<long long>(n - 1) * group_size + (g - 1); }
};

/// Mode count the receivers actually switch among: every message is held by
/// only G-1 transmitters, so modes beyond that are not exploitable by this
/// scheme.
int effective_modes(int group_size, int modes);

/// Asymmetric groupcast clip: min(M_tx, M_rx).
int effective_modes_bcgm(int modes_tx, int modes_rx);

UsiMessageTable build_table(int K, int G, int M);

/// First min(M, G-1) transmitters holding W_{n,g}, in the set order.
std::vector<int> tx_support(int n, int g, const UsiMessageTable& table);

/// Bijection between shuffle messages W~_{T,t} (file group T, destination t
/// outside T) and unicast messages W_{n,g} with G = r+1.
struct RelabelMap {
    int users = 0;  // K
    int load = 0;   // r
    GroupTable files{0, 0, {}};   // size-r subsets
    GroupTable groups{0, 0, {}};  // size-(r+1) subsets

    /// (n, g) -> (file index, destination node).
    std::pair<int, int> to_mapreduce(int n, int g) const;
    /// (file index, destination node) -> (n, g).
    std::pair<int, int> to_usi(int file_index, int destination) const;

    long long message_count() const {
        return static_cast<long long>(users - load) * files.group_count();
    }
};
RelabelMap relabel_mapreduce_to_usi(int K, int r);

/// Per-message transmit signal of Definition-style distributed precoding:
/// columns on the support carry the antenna streams of v_n * w, all other
/// columns zero. Dense desk-scale form.
Matrix distributed_signal(int n, int g, std::span<const cplx> w, const Matrix& v_n,
                          const std::vector<int>& support, int users);

using MessageMatrix = std::vector<std::vector<cplx>>;  // (n-1)*G+(g-1) -> symbols

/// Superposition of all per-message distributed signals, built slot by slot
/// (slots x K). Every column is asserted to depend only on messages its
/// transmitter holds; a routing override that violates this throws
/// encoding_error.
Matrix transmit_all(const UsiMessageTable& table, const bcgm::PrecoderGrid& grid,
                    const MessageMatrix& messages,
                    const std::vector<std::vector<int>>* routing_override = nullptr);

/// Effective M' x M' block channel of message (n,g) at receiver k: mode rows
/// 1..M' restricted to the support columns.
Matrix block_channel(const ChannelBook& book, int k, const MessageInfo& info, int effective,
                     long long q = 1);

struct DecodedMessage {
    int super_message = 0;
    int position = 0;  // g of the recovered message
    std::vector<cplx> symbols;
    double condition = 0.0;
    bool conditioning_warning = false;
};

/// Project with the structured decoders (one per desired super-message,
/// parallel to desired_indices(k)), subtract side information through the
/// receiver's channel knowledge, and invert the per-block channel.
/// side_info holds symbol vectors indexed like MessageMatrix; entries the
/// receiver does not hold stay empty. Missing required entries throw
/// decoding_error.
std::vector<DecodedMessage> decode(int k, std::span<const cplx> y, const UsiMessageTable& table,
                                   const bcgm::PrecoderGrid& grid,
                                   const std::vector<bcgm::SparseDecoder>& decoders,
                                   const MessageMatrix& side_info, const ChannelBook& book,
                                   long long q = 1);

/// Worst per-transmitter amplification of unit-power message symbols across
/// slots, for the single-scalar power normalization.
double peak_amplification(const UsiMessageTable& table, const bcgm::PrecoderGrid& grid);

/// M = 1 schedule: slot n carries the G messages of super-message n
/// simultaneously, message (n,g) from holder S_n(mod1(g+1, G)). Every
/// destination cancels the other G-1 via side information; non-members see a
/// single aligned combination.
struct M1Assignment {
    int super_message = 0;
    int position = 0;
    int transmitter = 0;
};
std::vector<std::vector<M1Assignment>> m1_schedule(int K, int G);

/// Transmit matrix (N_g x K) carrying symbol sym of every message under the
/// M = 1 schedule.
Matrix m1_transmit(const UsiMessageTable& table, const MessageMatrix& messages, long long sym);

/// Recover symbol sym of each desired message of receiver k from the N_g
/// received samples.
std::vector<DecodedMessage> m1_decode(int k, std::span<const cplx> y, const UsiMessageTable& table,
                                      const MessageMatrix& side_info, long long sym,
                                      const ChannelBook& book, long long q = 1);

}  // namespace bia::usi
