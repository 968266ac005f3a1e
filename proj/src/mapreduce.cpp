#include "bia/mapreduce.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bia/bcgm.hpp"
#include "bia/channel.hpp"
#include "bia/errors.hpp"
#include "bia/linalg.hpp"
#include "bia/rng.hpp"
#include "bia/usi.hpp"

namespace bia::mr {
namespace {

constexpr std::uint64_t kPayloadTag = 0x70617964;
const double kNibbleScale = 1.0 / std::sqrt(42.5);  // unit average power over the byte grid

std::uint64_t fnv1a(std::uint64_t state, std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::vector<std::uint8_t> expand_digest(std::uint64_t state, int bytes) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(bytes));
    const RandomStream s(state);
    for (int i = 0; i < bytes; ++i)
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s.word(static_cast<std::uint64_t>(i / 8)) >> (8 * (i % 8)));
    return out;
}

}  // namespace

MapReduceJob build_job(int K, int r, std::vector<std::vector<std::uint8_t>> payloads, int iva_bytes) {
    if (K < 1 || r < 1 || r > K) throw parameter_error("build_job: need 1 <= r <= K");
    if (iva_bytes < 0) throw parameter_error("build_job: iva_bytes must be >= 0");
    MapReduceJob job;
    job.nodes = K;
    job.load = r;
    job.files = ordered_subsets(K, r);
    job.iva_bytes = iva_bytes;
    if (static_cast<long long>(payloads.size()) != job.files.group_count())
        throw parameter_error("build_job: expected " + std::to_string(job.files.group_count()) +
                              " payloads, got " + std::to_string(payloads.size()));
    job.payloads = std::move(payloads);
    return job;
}

std::vector<std::vector<std::uint8_t>> synth_payloads(int count, int bytes, std::uint64_t seed) {
    std::vector<std::vector<std::uint8_t>> payloads(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        const RandomStream s = RandomStream(seed).fork({kPayloadTag, static_cast<std::uint64_t>(n)});
        auto& p = payloads[static_cast<std::size_t>(n)];
        p.resize(static_cast<std::size_t>(bytes));
        for (int i = 0; i < bytes; ++i)
            p[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(s.word(static_cast<std::uint64_t>(i / 8)) >> (8 * (i % 8)));
    }
    return payloads;
}

std::vector<std::uint8_t> map_iva(const MapReduceJob& job, int k, int n) {
    std::uint64_t state = 0xcbf29ce484222325ULL;
    const std::uint8_t key[2] = {static_cast<std::uint8_t>(k), static_cast<std::uint8_t>(n)};
    state = fnv1a(state, key);
    state = fnv1a(state, job.payloads[static_cast<std::size_t>(n - 1)]);
    return expand_digest(state, job.iva_bytes);
}

const std::vector<std::uint8_t>& IvaStore::value(int k, int n) const {
    return values[static_cast<std::size_t>((k - 1) * file_count + (n - 1))];
}

IvaStore map_phase(const MapReduceJob& job) {
    IvaStore store;
    store.nodes = job.nodes;
    store.file_count = job.files.group_count();
    store.values.resize(static_cast<std::size_t>(store.nodes) * store.file_count);
    for (int k = 1; k <= job.nodes; ++k) {
        for (int n = 1; n <= store.file_count; ++n) {
            store.values[static_cast<std::size_t>((k - 1) * store.file_count + (n - 1))] =
                map_iva(job, k, n);
        }
    }
    return store;
}

std::vector<cplx> bytes_to_symbols(std::span<const std::uint8_t> bytes) {
    std::vector<cplx> out(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double hi = static_cast<double>(bytes[i] >> 4) - 7.5;
        const double lo = static_cast<double>(bytes[i] & 0x0f) - 7.5;
        out[i] = cplx{hi * kNibbleScale, lo * kNibbleScale};
    }
    return out;
}

std::vector<std::uint8_t> symbols_to_bytes(std::span<const cplx> symbols, std::size_t byte_count,
                                           double* max_error) {
    std::vector<std::uint8_t> out(byte_count);
    double worst = 0.0;
    for (std::size_t i = 0; i < byte_count; ++i) {
        const double re = symbols[i].real() / kNibbleScale + 7.5;
        const double im = symbols[i].imag() / kNibbleScale + 7.5;
        const int hi = std::clamp(static_cast<int>(std::lround(re)), 0, 15);
        const int lo = std::clamp(static_cast<int>(std::lround(im)), 0, 15);
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        const cplx ideal{(hi - 7.5) * kNibbleScale, (lo - 7.5) * kNibbleScale};
        worst = std::max(worst, std::abs(symbols[i] - ideal));
    }
    if (max_error) *max_error = worst;
    return out;
}

ShuffleLedger shuffle_phase(const MapReduceJob& job, const IvaStore& ivas, const ShuffleConfig& cfg) {
    const int K = job.nodes;
    const int r = job.load;
    if (r > K - 1) throw parameter_error("shuffle_phase: r = K leaves nothing to deliver");
    const int G = r + 1;
    const usi::RelabelMap relabel = usi::relabel_mapreduce_to_usi(K, r);
    const usi::UsiMessageTable table = usi::build_table(K, G, cfg.modes);
    const long long n_g = table.groups.group_count();

    ShuffleLedger ledger;
    ledger.nodes = K;
    ledger.load = r;
    ledger.modes = cfg.modes;
    ledger.effective_modes = table.effective;
    ledger.sigma2 = cfg.sigma2;
    ledger.seed = cfg.seed;
    ledger.redundant_count = static_cast<long long>(r) * job.files.group_count();
    ledger.effective_count = relabel.message_count();

    // effective IVAs as unicast message symbol vectors
    const std::size_t message_count = static_cast<std::size_t>(table.message_count());
    std::vector<std::vector<cplx>> payload_symbols(message_count);
    std::vector<std::pair<int, int>> labels(message_count);  // (file, destination)
    for (int n = 1; n <= n_g; ++n) {
        for (int g = 1; g <= G; ++g) {
            const auto [file, dest] = relabel.to_mapreduce(n, g);
            const std::size_t idx = static_cast<std::size_t>(table.flat(n, g));
            labels[idx] = {file, dest};
            // any holder computed the identical value; the transmit side reads
            // it from the first supporting node's store
            const int holder = table.info(n, g).knowing_txs.front();
            payload_symbols[idx] = bytes_to_symbols(ivas.value(dest, file));
            (void)holder;
        }
    }
    const long long symbol_count = static_cast<long long>(job.iva_bytes);

    std::vector<std::vector<cplx>> recovered(message_count);
    for (auto& v : recovered) v.reserve(static_cast<std::size_t>(symbol_count));

    if (ledger.effective_modes == 1) {
        ledger.streams_per_round = 1;
        ledger.rounds = symbol_count;
        ledger.slots_used = symbol_count * n_g;
        ledger.dof_message = Rational(1, n_g).str();
        ledger.dof_sum = Rational(G, 1).str();
        const ChannelBook book = draw_channels(K, std::max(cfg.modes, 1), K, 1,
                                               std::max<long long>(1, ledger.slots_used), cfg.seed);
        std::vector<std::uint8_t> mode_one(static_cast<std::size_t>(n_g), 1);
        for (long long sym = 0; sym < symbol_count; ++sym) {
            const Matrix x = usi::m1_transmit(table, payload_symbols, sym);
            for (int k = 1; k <= K; ++k) {
                const ReceivedSignal y =
                    receive(book, k, mode_one, x, cfg.sigma2, static_cast<std::uint64_t>(sym));
                // side information: the receiver's own map-phase results
                usi::MessageMatrix side(message_count);
                for (int n : desired_indices(k, table.groups)) {
                    const int g_self = member_position(n, k, table.groups);
                    for (int g = 1; g <= G; ++g) {
                        if (g == g_self) continue;
                        const std::size_t idx = static_cast<std::size_t>(table.flat(n, g));
                        side[idx] = bytes_to_symbols(ivas.value(labels[idx].second, labels[idx].first));
                    }
                }
                for (const auto& dm : usi::m1_decode(k, y.samples, table, side, sym, book)) {
                    recovered[static_cast<std::size_t>(table.flat(dm.super_message, dm.position))]
                        .push_back(dm.symbols.front());
                }
            }
        }
    } else {
        const auto params = bcgm::SchemeParams::make(K, G, table.effective);
        const auto lambda = vandermonde_mds(params.per_rx_messages, params.num_messages);
        const bcgm::PrecoderGrid grid(params, lambda.base);
        ledger.streams_per_round = params.streams;
        ledger.rounds = (symbol_count + params.streams - 1) / params.streams;
        ledger.slots_used = ledger.rounds * params.slots;
        const auto dims = bcgm::scheme_dimensions(params);
        ledger.dof_message = dims.dof_message.str();
        ledger.dof_sum = (Rational(G, 1) * dims.dof_sum).str();

        const ChannelBook book = draw_channels(K, std::max(cfg.modes, table.effective), K, 1,
                                               std::max<long long>(1, ledger.slots_used), cfg.seed);
        std::vector<bcgm::SwitchingPattern> patterns;
        std::vector<std::vector<bcgm::SparseDecoder>> decoders(static_cast<std::size_t>(K));
        patterns.reserve(static_cast<std::size_t>(K));
        for (int k = 1; k <= K; ++k) {
            patterns.push_back(bcgm::switching_pattern_full(k, params));
            for (int n : desired_indices(k, params.groups))
                decoders[static_cast<std::size_t>(k - 1)].push_back(
                    bcgm::structured_decoder(k, n, patterns.back(), grid));
        }

        for (long long round = 0; round < ledger.rounds; ++round) {
            usi::MessageMatrix slice(message_count);
            for (std::size_t i = 0; i < message_count; ++i) {
                auto& s = slice[i];
                s.assign(static_cast<std::size_t>(params.streams), cplx{});
                for (long long c = 0; c < params.streams; ++c) {
                    const long long src = round * params.streams + c;
                    if (src < symbol_count) s[static_cast<std::size_t>(c)] = payload_symbols[i][static_cast<std::size_t>(src)];
                }
            }
            const Matrix x = usi::transmit_all(table, grid, slice);
            for (int k = 1; k <= K; ++k) {
                const ReceivedSignal y = receive(book, k, patterns[static_cast<std::size_t>(k - 1)].modes,
                                                 x, cfg.sigma2, static_cast<std::uint64_t>(round));
                usi::MessageMatrix side(message_count);
                for (int n : desired_indices(k, table.groups)) {
                    const int g_self = member_position(n, k, table.groups);
                    for (int g = 1; g <= G; ++g) {
                        if (g == g_self) continue;
                        const std::size_t idx = static_cast<std::size_t>(table.flat(n, g));
                        auto full = bytes_to_symbols(ivas.value(labels[idx].second, labels[idx].first));
                        auto& s = side[idx];
                        s.assign(static_cast<std::size_t>(params.streams), cplx{});
                        for (long long c = 0; c < params.streams; ++c) {
                            const long long src = round * params.streams + c;
                            if (src < symbol_count) s[static_cast<std::size_t>(c)] = full[static_cast<std::size_t>(src)];
                        }
                    }
                }
                for (const auto& dm :
                     usi::decode(k, y.samples, table, grid, decoders[static_cast<std::size_t>(k - 1)],
                                 side, book)) {
                    auto& dst = recovered[static_cast<std::size_t>(
                        table.flat(dm.super_message, dm.position))];
                    for (const cplx& s : dm.symbols) {
                        if (static_cast<long long>(dst.size()) < symbol_count) dst.push_back(s);
                    }
                }
            }
        }
    }

    ledger.all_exact = true;
    for (int n = 1; n <= n_g; ++n) {
        for (int g = 1; g <= G; ++g) {
            const std::size_t idx = static_cast<std::size_t>(table.flat(n, g));
            IvaDelivery d;
            d.file = labels[idx].first;
            d.destination = labels[idx].second;
            d.usi_super = n;
            d.usi_position = g;
            if (static_cast<long long>(recovered[idx].size()) != symbol_count)
                throw decoding_error("shuffle_phase: delivery incomplete for file " +
                                     std::to_string(d.file) + " -> node " + std::to_string(d.destination));
            d.delivered = symbols_to_bytes(recovered[idx], static_cast<std::size_t>(job.iva_bytes),
                                           &d.max_symbol_error);
            d.exact = d.delivered == ivas.value(d.destination, d.file);
            ledger.worst_symbol_error = std::max(ledger.worst_symbol_error, d.max_symbol_error);
            ledger.all_exact = ledger.all_exact && d.exact;
            ledger.deliveries.push_back(std::move(d));
        }
    }
    return ledger;
}

std::vector<std::vector<std::uint8_t>> reduce_phase(const MapReduceJob& job, const IvaStore& ivas,
                                                    const ShuffleLedger& ledger) {
    std::vector<std::vector<std::uint8_t>> outputs(static_cast<std::size_t>(job.nodes));
    for (int k = 1; k <= job.nodes; ++k) {
        std::uint64_t state = 0xcbf29ce484222325ULL;
        for (int n = 1; n <= job.files.group_count(); ++n) {
            const std::vector<std::uint8_t>* iva = nullptr;
            if (job.node_knows_file(k, n)) {
                iva = &ivas.value(k, n);
            } else {
                for (const IvaDelivery& d : ledger.deliveries) {
                    if (d.file == n && d.destination == k) {
                        iva = &d.delivered;
                        break;
                    }
                }
            }
            if (!iva)
                throw decoding_error("reduce_phase: node " + std::to_string(k) + " is missing IVA of file " +
                                     std::to_string(n));
            state = fnv1a(state, *iva);
        }
        outputs[static_cast<std::size_t>(k - 1)] = expand_digest(state, job.iva_bytes);
    }
    return outputs;
}

OracleReport oracle_check(const MapReduceJob& job,
                          const std::vector<std::vector<std::uint8_t>>& outputs) {
    OracleReport report;
    report.pass = true;
    for (int k = 1; k <= job.nodes; ++k) {
        std::uint64_t state = 0xcbf29ce484222325ULL;
        for (int n = 1; n <= job.files.group_count(); ++n) {
            const auto iva = map_iva(job, k, n);
            state = fnv1a(state, iva);
        }
        const auto expected = expand_digest(state, job.iva_bytes);
        if (outputs[static_cast<std::size_t>(k - 1)] != expected) {
            report.pass = false;
            report.failed_nodes.push_back(k);
        }
    }
    return report;
}

JobSpec parse_job_spec(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    JobSpec spec;
    spec.nodes = j.value("k", spec.nodes);
    spec.load = j.value("r", spec.load);
    spec.modes = j.value("m", spec.modes);
    spec.payload_bytes = j.value("payload_bytes", spec.payload_bytes);
    spec.payload_seed = j.value("payload_seed", spec.payload_seed);
    spec.iva_bytes = j.value("iva_bytes", spec.iva_bytes);
    spec.snr_db = j.value("snr_db", spec.snr_db);
    spec.noiseless = j.value("noiseless", spec.noiseless);
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("payloads")) {
        for (const auto& p : j["payloads"]) {
            const std::string s = p.get<std::string>();
            spec.payloads.emplace_back(s.begin(), s.end());
        }
        spec.payload_count = static_cast<int>(spec.payloads.size());
    }
    return spec;
}

std::string ledger_to_json(const ShuffleLedger& ledger) {
    nlohmann::json j;
    j["record"] = "shuffle_ledger";
    j["k"] = ledger.nodes;
    j["r"] = ledger.load;
    j["m"] = ledger.modes;
    j["m_effective"] = ledger.effective_modes;
    j["redundant_ivas"] = ledger.redundant_count;
    j["effective_ivas"] = ledger.effective_count;
    j["rounds"] = ledger.rounds;
    j["slots_used"] = ledger.slots_used;
    j["streams_per_round"] = ledger.streams_per_round;
    j["dof_message"] = ledger.dof_message;
    j["dof_sum"] = ledger.dof_sum;
    j["sigma2"] = ledger.sigma2;
    j["seed"] = ledger.seed;
    j["all_exact"] = ledger.all_exact;
    j["worst_symbol_error"] = ledger.worst_symbol_error;
    nlohmann::json rows = nlohmann::json::array();
    for (const IvaDelivery& d : ledger.deliveries) {
        nlohmann::json row;
        row["file"] = d.file;
        row["destination"] = d.destination;
        row["usi_super"] = d.usi_super;
        row["usi_position"] = d.usi_position;
        row["exact"] = d.exact;
        row["max_symbol_error"] = d.max_symbol_error;
        rows.push_back(row);
    }
    j["deliveries"] = rows;
    return j.dump();
}

}  // namespace bia::mr
