#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bia/combinatorics.hpp"
#include "bia/matrix.hpp"

namespace bia::mr {

/// Symmetric shuffle job: binomial(K, r) files, each held by a distinct
/// size-r node set; node k must end up with the intermediate value a_{k,n} of
/// every file. Map and reduce default to keyed digests of the file payloads
/// so correctness checks are content-sensitive without a real workload.
struct MapReduceJob {
    int nodes = 0;  // K
    int load = 0;   // r
    GroupTable files{0, 0, {}};
    std::vector<std::vector<std::uint8_t>> payloads;
    int iva_bytes = 16;

    bool node_knows_file(int node, int n) const { return files.contains(n, node); }
};

MapReduceJob build_job(int K, int r, std::vector<std::vector<std::uint8_t>> payloads,
                       int iva_bytes = 16);

/// Deterministic demo payloads.
std::vector<std::vector<std::uint8_t>> synth_payloads(int count, int bytes, std::uint64_t seed);

/// Map function u_{k,n}: keyed digest of the file payload.
std::vector<std::uint8_t> map_iva(const MapReduceJob& job, int k, int n);

/// All intermediate values, materialized at the nodes holding each file.
struct IvaStore {
    int nodes = 0;
    int file_count = 0;
    std::vector<std::vector<std::uint8_t>> values;  // (k-1)*file_count + (n-1)

    const std::vector<std::uint8_t>& value(int k, int n) const;
};
IvaStore map_phase(const MapReduceJob& job);

struct IvaDelivery {
    int file = 0;              // n
    int destination = 0;       // node outside the holder set
    int usi_super = 0;         // relabeled super-message index
    int usi_position = 0;      // relabeled position within the super-message
    std::vector<std::uint8_t> delivered;
    bool exact = false;
    double max_symbol_error = 0.0;
};

struct ShuffleLedger {
    int nodes = 0, load = 0, modes = 0, effective_modes = 0;
    long long redundant_count = 0, effective_count = 0;
    long long slots_used = 0, rounds = 0, streams_per_round = 0;
    std::string dof_message, dof_sum;
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
    std::vector<IvaDelivery> deliveries;
    bool all_exact = false;
    double worst_symbol_error = 0.0;
};

struct ShuffleConfig {
    int modes = 1;
    std::uint64_t seed = 0;
    double sigma2 = 0.0;  // 0 is exactly noiseless
};

/// Encode the effective intermediate values as complex symbol blocks, relabel
/// them to unicast messages, deliver them over the simulated wireless channel
/// (superposition schedule when only one mode is usable, the full alignment
/// scheme otherwise), and record per-value delivery status.
ShuffleLedger shuffle_phase(const MapReduceJob& job, const IvaStore& ivas, const ShuffleConfig& cfg);

/// Reduce each node's full IVA row, using delivered values where the node
/// did not compute its own.
std::vector<std::vector<std::uint8_t>> reduce_phase(const MapReduceJob& job, const IvaStore& ivas,
                                                    const ShuffleLedger& ledger);

struct OracleReport {
    bool pass = false;
    std::vector<int> failed_nodes;
};
/// Recompute every reduce output centrally from the raw files and compare.
OracleReport oracle_check(const MapReduceJob& job,
                          const std::vector<std::vector<std::uint8_t>>& outputs);

/// Invertible byte constellation: one byte per complex symbol, nibbles on a
/// 16x16 grid scaled to unit average power. Noiseless round trips are exact.
std::vector<cplx> bytes_to_symbols(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> symbols_to_bytes(std::span<const cplx> symbols, std::size_t byte_count,
                                           double* max_error = nullptr);

/// Job description files (JSON text: K, r, M, payload seed or payloads, SNR,
/// trials, seed).
struct JobSpec {
    int nodes = 4;
    int load = 2;
    int modes = 1;
    int payload_count = -1;  // -1: binomial(nodes, load)
    int payload_bytes = 64;
    std::uint64_t payload_seed = 1;
    int iva_bytes = 16;
    double snr_db = 0.0;
    bool noiseless = true;
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<std::vector<std::uint8_t>> payloads;  // optional explicit payloads
};
JobSpec parse_job_spec(const std::string& json_text);
std::string ledger_to_json(const ShuffleLedger& ledger);

}  // namespace bia::mr
