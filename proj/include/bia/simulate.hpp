#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bia/bcgm.hpp"
#include "bia/channel.hpp"
#include "bia/usi.hpp"

namespace bia::sim {

struct MessageReport {
    int message = 0;   // super-message n
    int position = 0;  // g within the super-message, 0 in the groupcast setting
    double max_rel_error = 0.0;
    bool conditioning_warning = false;
};

struct ReceiverReport {
    int receiver = 0;
    std::vector<MessageReport> messages;
    std::vector<long long> family_ranks;  // rank of every E_{k,n}, diagnostics only
    long long union_rank = -1;
    double worst_decoder_residual = -1.0;
};

struct DecodingReport {
    std::string setting;
    int users = 0, group_size = 0, modes = 0, effective_modes = 0;
    long long blocks = 0, streams = 0, slots = 0;
    std::string dof_message, dof_sum;
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
    std::vector<ReceiverReport> receivers;
    double worst_rel_error = 0.0;
};

/// Unit-power random message symbols for a seeded run.
std::vector<cplx> random_symbols(std::uint64_t seed, std::uint64_t stream, long long count);

/// End-to-end groupcast run: encode random symbols, transmit over a seeded
/// fading channel, decode every desired message at every receiver.
DecodingReport run_bcgm(int K, int G, int M, std::uint64_t seed, double sigma2,
                        bool diagnostics = false);

/// End-to-end unicast-with-side-information run (distributed transmitters,
/// side-information subtraction; the M' = 1 regime uses the superposition
/// schedule).
DecodingReport run_usi(int K, int G, int M, std::uint64_t seed, double sigma2,
                       bool diagnostics = false);

}  // namespace bia::sim
