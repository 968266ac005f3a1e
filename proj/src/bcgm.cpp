#include "bia/bcgm.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "bia/errors.hpp"
#include "bia/linalg.hpp"

namespace bia::bcgm {
namespace {

constexpr long long kMaxDenseEntries = 20'000'000;

long long ipow(long long base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

void ensure_dense(long long rows, long long cols, const char* what) {
    if (rows * cols > kMaxDenseEntries)
        throw size_error(std::string(what) + ": dense representation too large (" + std::to_string(rows) +
                         "x" + std::to_string(cols) + ")");
}

bool contains_sorted(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

SchemeParams SchemeParams::make(int K, int G, int M) {
    if (K < 1 || G < 1 || G > K) throw parameter_error("SchemeParams: need 1 <= G <= K");
    if (M < 1 || M > 64) throw parameter_error("SchemeParams: need 1 <= M <= 64");
    SchemeParams p;
    p.users = K;
    p.group_size = G;
    p.modes = M;
    p.groups = ordered_subsets(K, G);
    const long long ng = binomial(K, G);
    const long long nug = binomial(K - 1, G - 1);
    p.num_messages = static_cast<int>(ng);
    p.per_rx_messages = static_cast<int>(nug);
    if (M == 1) {
        p.blocks = 1;
        p.round_slots = 0;
    } else {
        long long blocks = 1;
        for (int i = 0; i + 1 < ng; ++i) {
            blocks *= (M - 1);
            if (blocks > kMaxSlots)
                throw size_error("SchemeParams: scheme duration exceeds " + std::to_string(kMaxSlots) +
                                 " slots");
        }
        p.blocks = blocks;
        p.round_slots = (M - 1) * blocks;
    }
    p.streams = static_cast<long long>(M) * p.blocks;
    p.slots = nug * p.round_slots + ng * p.blocks;
    if (p.slots > kMaxSlots)
        throw size_error("SchemeParams: scheme duration " + std::to_string(p.slots) + " exceeds " +
                         std::to_string(kMaxSlots) + " slots");
    return p;
}

long long block_index(int n, long long t, const SchemeParams& p) {
    if (p.modes < 2) throw parameter_error("block_index: defined for M >= 2");
    if (n < 1 || n > p.num_messages) throw parameter_error("block_index: message out of range");
    if (t < 1 || t > p.round_slots) throw parameter_error("block_index: slot out of range");
    const long long seg = ipow(p.modes - 1, n - 1);
    return ((t - 1) / (seg * (p.modes - 1))) * seg + mod1(t, static_cast<int>(seg));
}

Matrix selection_matrix(int n, const SchemeParams& p) {
    if (p.modes < 2) throw parameter_error("selection_matrix: defined for M >= 2");
    ensure_dense(p.round_slots, p.blocks, "selection_matrix");
    Matrix pi(p.round_slots, p.blocks);
    for (long long t = 1; t <= p.round_slots; ++t) pi(t - 1, block_index(n, t, p) - 1) = 1.0;
    return pi;
}

Matrix alignment_precoder(int n, const SchemeParams& p) {
    ensure_dense(p.round_slots * p.modes, p.streams, "alignment_precoder");
    return kron(selection_matrix(n, p), Matrix::identity(p.modes));
}

Matrix resolution_precoder(int n, const SchemeParams& p) {
    if (n < 1 || n > p.num_messages) throw parameter_error("resolution_precoder: message out of range");
    const long long rows = static_cast<long long>(p.num_messages) * p.blocks;
    ensure_dense(rows * p.modes, p.streams, "resolution_precoder");
    Matrix placement(rows, p.blocks);
    for (long long l = 0; l < p.blocks; ++l) placement((n - 1) * p.blocks + l, l) = 1.0;
    return kron(placement, Matrix::identity(p.modes));
}

namespace {

void validate_lambda(const Matrix& lambda, const SchemeParams& p) {
    if (lambda.rows() != p.per_rx_messages || lambda.cols() != p.num_messages)
        throw parameter_error("lambda must be nu_g x N_g (" + std::to_string(p.per_rx_messages) + "x" +
                              std::to_string(p.num_messages) + ")");
    if (!lambda.all_finite()) throw parameter_error("lambda has non-finite entries");
    for (long long j = 0; j < lambda.cols(); ++j) {
        if (std::abs(lambda(0, j) - cplx{1.0, 0.0}) > 1e-12)
            throw parameter_error("lambda first row must be all ones");
    }
}

}  // namespace

Matrix full_precoder(int n, const Matrix& lambda, const SchemeParams& p) {
    validate_lambda(lambda, p);
    if (n < 1 || n > p.num_messages) throw parameter_error("full_precoder: message out of range");
    ensure_dense(p.slots * p.modes, p.streams, "full_precoder");
    Matrix v(p.slots * p.modes, p.streams);
    if (p.modes >= 2) {
        const Matrix t_n = alignment_precoder(n, p);
        for (int round = 0; round < p.per_rx_messages; ++round) {
            const cplx scale = lambda(round, n - 1);
            const long long r0 = round * p.round_slots * p.modes;
            for (long long r = 0; r < t_n.rows(); ++r)
                for (long long c = 0; c < t_n.cols(); ++c) v(r0 + r, c) = scale * t_n(r, c);
        }
    }
    const Matrix u_n = resolution_precoder(n, p);
    const long long r0 = static_cast<long long>(p.per_rx_messages) * p.round_slots * p.modes;
    for (long long r = 0; r < u_n.rows(); ++r)
        for (long long c = 0; c < u_n.cols(); ++c) v(r0 + r, c) = u_n(r, c);
    return v;
}

PrecoderGrid::PrecoderGrid(SchemeParams params, Matrix lambda)
    : params_(std::move(params)), lambda_(std::move(lambda)) {
    validate_lambda(lambda_, params_);
}

PrecoderGrid::Slot PrecoderGrid::slot_of(int n, long long t) const {
    const SchemeParams& p = params_;
    if (n < 1 || n > p.num_messages || t < 1 || t > p.slots)
        throw parameter_error("slot_of: index out of range");
    const long long phase_total = static_cast<long long>(p.per_rx_messages) * p.round_slots;
    if (t <= phase_total) {
        const long long round = (t - 1) / p.round_slots;  // 0-based
        const long long in_round = t - round * p.round_slots;
        return {block_index(n, in_round, p), lambda_(round, n - 1)};
    }
    const long long u = t - phase_total;  // 1..N_g*blocks
    const int owner = static_cast<int>((u - 1) / p.blocks) + 1;
    if (owner != n) return {};
    return {mod1(u, static_cast<int>(p.blocks)), cplx{1.0, 0.0}};
}

cplx PrecoderGrid::alpha(int n, long long t, long long block) const {
    const Slot s = slot_of(n, t);
    return s.block == block ? s.coeff : cplx{};
}

double PrecoderGrid::peak_amplification() const {
    double peak = 1.0;  // resolution slots superpose nothing
    for (long long v = 0; v < lambda_.rows(); ++v) {
        double sum = 0.0;
        for (long long n = 0; n < lambda_.cols(); ++n) sum += std::norm(lambda_(v, n));
        peak = std::max(peak, std::sqrt(sum));
    }
    return params_.round_slots > 0 ? peak : 1.0;
}

std::vector<std::uint8_t> first_phase_pattern(const std::vector<int>& desired, const SchemeParams& p) {
    const int M = p.modes;
    if (M < 2) return {};
    std::vector<std::uint8_t> pat(static_cast<std::size_t>(p.round_slots));
    const bool want_first = contains_sorted(desired, 1);
    for (int j = 0; j < M - 1; ++j)
        pat[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(want_first ? j + 1 : 1);
    long long seg = M - 1;  // prefix determined by messages processed so far
    for (int n = 2; n <= p.num_messages; ++n) {
        const bool want = contains_sorted(desired, n);
        for (int i = 1; i <= M - 2; ++i) {
            for (long long j = 0; j < seg; ++j) {
                const std::uint8_t base = pat[static_cast<std::size_t>(j)];
                pat[static_cast<std::size_t>(i * seg + j)] =
                    want ? static_cast<std::uint8_t>(mod1(base + i, M - 1)) : base;
            }
        }
        seg *= (M - 1);
    }
    return pat;
}

AlignmentCheck verify_alignment(std::span<const std::uint8_t> first_phase,
                                const std::vector<int>& desired, const SchemeParams& p) {
    AlignmentCheck result;
    const int M = p.modes;
    if (M < 2) {
        if (!first_phase.empty()) {
            result.pass = false;
            result.detail = "first phase must be empty for M = 1";
        }
        return result;
    }
    if (static_cast<long long>(first_phase.size()) != p.round_slots) {
        result.pass = false;
        result.detail = "pattern length must be (M-1)l";
        return result;
    }
    for (long long t = 0; t < p.round_slots; ++t) {
        const int m = first_phase[static_cast<std::size_t>(t)];
        if (m < 1 || m > M - 1) {
            result.pass = false;
            result.slot = t + 1;
            result.detail = "mode " + std::to_string(m) + " outside [1..M-1] at slot " + std::to_string(t + 1);
            return result;
        }
    }
    // interference constancy first, then desired-mode cycling, matching the
    // order of the alignment condition
    for (const bool check_undesired : {true, false}) {
        for (int n = 1; n <= p.num_messages; ++n) {
            const bool want = contains_sorted(desired, n);
            if (want == check_undesired) continue;
            const long long seg = ipow(M - 1, n - 1);
            const long long rep = seg * (M - 1);
            const long long h_count = p.round_slots / rep;
            for (long long h = 0; h < h_count; ++h) {
                for (long long j = 1; j <= seg; ++j) {
                    const long long base_t = h * rep + j;
                    const int anchor = first_phase[static_cast<std::size_t>(base_t - 1)];
                    for (long long i = 1; i <= M - 2; ++i) {
                        const long long t = h * rep + i * seg + j;
                        const int expected = want ? mod1(anchor + i, M - 1) : anchor;
                        if (first_phase[static_cast<std::size_t>(t - 1)] != expected) {
                            result.pass = false;
                            result.message = n;
                            result.h = h;
                            result.j = j;
                            result.i = i;
                            result.slot = t;
                            result.detail =
                                std::string(want ? "desired" : "undesired") + " message " +
                                std::to_string(n) + ": slot " + std::to_string(t) + " has mode " +
                                std::to_string(int(first_phase[static_cast<std::size_t>(t - 1)])) +
                                ", expected " + std::to_string(expected);
                            return result;
                        }
                    }
                }
            }
        }
    }
    return result;
}

std::uint8_t interference_mode(std::span<const std::uint8_t> first_phase, int n, long long block,
                               const SchemeParams& p) {
    const int M = p.modes;
    if (M < 2) return 1;
    if (block < 1 || block > p.blocks) throw parameter_error("interference_mode: block out of range");
    const long long seg = ipow(M - 1, n - 1);
    const long long h = (block - 1) / seg;
    const long long j = mod1(block, static_cast<int>(seg));
    const long long base_t = h * seg * (M - 1) + j;
    const std::uint8_t m = first_phase[static_cast<std::size_t>(base_t - 1)];
    for (long long i = 1; i <= M - 2; ++i) {
        const long long t = h * seg * (M - 1) + i * seg + j;
        if (first_phase[static_cast<std::size_t>(t - 1)] != m)
            throw alignment_error("interference_mode: pattern not constant over repeats of message " +
                                  std::to_string(n) + ", block " + std::to_string(block));
    }
    return m;
}

long long resolution_slot(int n, long long block, const SchemeParams& p) {
    return static_cast<long long>(p.per_rx_messages) * p.round_slots + (n - 1) * p.blocks + block;
}

SwitchingPattern switching_pattern_full(int k, const SchemeParams& p) {
    SwitchingPattern sp;
    sp.receiver = k;
    const std::vector<int> desired = desired_indices(k, p.groups);
    sp.first_phase = first_phase_pattern(desired, p);
    sp.modes.resize(static_cast<std::size_t>(p.slots));
    for (int v = 0; v < p.per_rx_messages; ++v) {
        std::copy(sp.first_phase.begin(), sp.first_phase.end(),
                  sp.modes.begin() + static_cast<long long>(v) * p.round_slots);
    }
    const long long phase_total = static_cast<long long>(p.per_rx_messages) * p.round_slots;
    for (long long u = 1; u <= static_cast<long long>(p.num_messages) * p.blocks; ++u) {
        const int owner = static_cast<int>((u - 1) / p.blocks) + 1;
        const long long block = mod1(u, static_cast<int>(p.blocks));
        sp.modes[static_cast<std::size_t>(phase_total + u - 1)] =
            contains_sorted(desired, owner) ? static_cast<std::uint8_t>(p.modes)
                                            : interference_mode(sp.first_phase, owner, block, p);
    }
    return sp;
}

ModeEntry effective_mode_entry(const SwitchingPattern& pattern, int n, long long t,
                               const PrecoderGrid& grid) {
    const PrecoderGrid::Slot s = grid.slot_of(n, t);
    if (s.block == 0) return {};
    const int mode = pattern.modes[static_cast<std::size_t>(t - 1)];
    if (mode < 1 || mode > grid.params().modes)
        throw parameter_error("effective_mode_entry: mode outside [1..M]");
    return {true, (s.block - 1) * grid.params().modes + mode - 1, s.coeff};
}

Matrix effective_mode_matrix(const SwitchingPattern& pattern, int n, const PrecoderGrid& grid) {
    const SchemeParams& p = grid.params();
    ensure_dense(p.slots, p.streams, "effective_mode_matrix");
    Matrix e(p.slots, p.streams);
    for (long long t = 1; t <= p.slots; ++t) {
        const ModeEntry entry = effective_mode_entry(pattern, n, t, grid);
        if (entry.nonzero) e(t - 1, entry.col) = entry.value;
    }
    return e;
}

long long structural_rank(const SwitchingPattern& pattern, int n, const PrecoderGrid& grid) {
    const SchemeParams& p = grid.params();
    std::vector<char> seen(static_cast<std::size_t>(p.streams), 0);
    long long rank = 0;
    for (long long t = 1; t <= p.slots; ++t) {
        const ModeEntry entry = effective_mode_entry(pattern, n, t, grid);
        if (entry.nonzero && std::abs(entry.value) > 0 && !seen[static_cast<std::size_t>(entry.col)]) {
            seen[static_cast<std::size_t>(entry.col)] = 1;
            ++rank;
        }
    }
    return rank;
}

namespace {

using SparseRow = std::vector<std::pair<long long, cplx>>;  // sorted by coordinate

// out = row - factor * pivot, coordinates kept sorted, entries cancelled
// relative to the row's running magnitude dropped.
void subtract_scaled(const SparseRow& row, const SparseRow& pivot, cplx factor, SparseRow& out) {
    out.clear();
    std::size_t a = 0, b = 0;
    double amax = 0.0;
    while (a < row.size() || b < pivot.size()) {
        if (b == pivot.size() || (a < row.size() && row[a].first < pivot[b].first)) {
            out.push_back(row[a++]);
        } else if (a == row.size() || pivot[b].first < row[a].first) {
            out.emplace_back(pivot[b].first, -factor * pivot[b].second);
            ++b;
        } else {
            out.emplace_back(row[a].first, row[a].second - factor * pivot[b].second);
            ++a;
            ++b;
        }
        amax = std::max(amax, std::abs(out.back().second));
    }
    std::erase_if(out, [amax](const auto& e) { return !(std::abs(e.second) > 1e-10 * amax); });
}

}  // namespace

long long union_structural_rank(const SwitchingPattern& pattern, const PrecoderGrid& grid) {
    const SchemeParams& p = grid.params();
    std::unordered_map<long long, int> pivot_at;  // -1 marks a singleton pivot
    pivot_at.reserve(static_cast<std::size_t>(p.slots) * 2);
    std::vector<SparseRow> pivots;
    long long rank = 0;
    SparseRow row, scratch;
    // resolution slots first: their rows are singletons, so the phase rows
    // afterwards shed their interference coordinates immediately
    std::vector<long long> order;
    order.reserve(static_cast<std::size_t>(p.slots));
    const long long phase_total = static_cast<long long>(p.per_rx_messages) * p.round_slots;
    for (long long t = phase_total + 1; t <= p.slots; ++t) order.push_back(t);
    for (long long t = 1; t <= phase_total; ++t) order.push_back(t);
    for (long long t : order) {
        row.clear();
        for (int n = 1; n <= p.num_messages; ++n) {
            const ModeEntry entry = effective_mode_entry(pattern, n, t, grid);
            if (entry.nonzero && std::abs(entry.value) > 0)
                row.emplace_back((static_cast<long long>(n - 1)) * p.streams + entry.col, entry.value);
        }
        std::sort(row.begin(), row.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        // eliminate on the largest remaining coordinate; the maximum strictly
        // decreases with every subtraction, so this terminates
        while (!row.empty()) {
            const long long c = row.back().first;
            const auto it = pivot_at.find(c);
            if (it == pivot_at.end()) {
                if (row.size() == 1) {
                    pivot_at.emplace(c, -1);
                } else {
                    const cplx lead = row.back().second;
                    for (auto& e : row) e.second /= lead;
                    pivot_at.emplace(c, static_cast<int>(pivots.size()));
                    pivots.push_back(row);
                }
                ++rank;
                break;
            }
            if (it->second < 0) {
                row.pop_back();  // singleton pivot just removes the coordinate
                continue;
            }
            subtract_scaled(row, pivots[static_cast<std::size_t>(it->second)], row.back().second,
                            scratch);
            row.swap(scratch);
        }
    }
    return rank;
}

std::vector<Matrix> decoder_matrices(int k, const SwitchingPattern& pattern, const PrecoderGrid& grid) {
    const SchemeParams& p = grid.params();
    const std::vector<int> desired = desired_indices(k, p.groups);
    std::vector<Matrix> family;
    family.reserve(static_cast<std::size_t>(p.num_messages));
    for (int n = 1; n <= p.num_messages; ++n) family.push_back(effective_mode_matrix(pattern, n, grid));
    std::vector<Matrix> decoders;
    decoders.reserve(desired.size());
    for (int n : desired) decoders.push_back(solve_decoder(family, n - 1));
    return decoders;
}

std::vector<cplx> SparseDecoder::apply(std::span<const cplx> y) const {
    std::vector<cplx> out(static_cast<std::size_t>(out_dim));
    for (long long r = 0; r < out_dim; ++r) {
        cplx acc{};
        for (long long i = row_offsets[static_cast<std::size_t>(r)];
             i < row_offsets[static_cast<std::size_t>(r + 1)]; ++i) {
            acc += coeff[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(slot_index[static_cast<std::size_t>(i)])];
        }
        out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
}

Matrix SparseDecoder::dense_transposed(long long slots) const {
    ensure_dense(out_dim, slots, "SparseDecoder::dense_transposed");
    Matrix d(out_dim, slots);
    for (long long r = 0; r < out_dim; ++r) {
        for (long long i = row_offsets[static_cast<std::size_t>(r)];
             i < row_offsets[static_cast<std::size_t>(r + 1)]; ++i) {
            d(r, slot_index[static_cast<std::size_t>(i)]) += coeff[static_cast<std::size_t>(i)];
        }
    }
    return d;
}

SparseDecoder structured_decoder(int k, int n, const SwitchingPattern& pattern, const PrecoderGrid& grid) {
    const SchemeParams& p = grid.params();
    const std::vector<int> desired = desired_indices(k, p.groups);
    const auto pos_it = std::lower_bound(desired.begin(), desired.end(), n);
    if (pos_it == desired.end() || *pos_it != n)
        throw membership_error("structured_decoder: message " + std::to_string(n) +
                               " is not desired by receiver " + std::to_string(k));
    const long long desired_pos = pos_it - desired.begin();  // 0-based position in V_k

    SparseDecoder dec;
    dec.receiver = k;
    dec.message = n;
    dec.out_dim = p.streams;
    dec.row_offsets.reserve(static_cast<std::size_t>(p.streams) + 1);
    dec.row_offsets.push_back(0);

    const int M = p.modes;
    Matrix correction;  // row: coefficient of each message after inverting lambda on V_k
    if (M >= 2) {
        std::vector<long long> cols;
        cols.reserve(desired.size());
        for (int d : desired) cols.push_back(d - 1);
        const Matrix lambda_vk = grid.lambda().submatrix_cols(cols);
        Matrix lambda_inv;
        try {
            lambda_inv = inverse(lambda_vk);
        } catch (const parameter_error&) {
            throw alignment_error("structured_decoder: lambda restricted to the desired set is singular");
        }
        correction = lambda_inv * grid.lambda();  // nu_g x N_g; unit columns on V_k
        // keep only the desired row
        Matrix row(1, correction.cols());
        for (long long c = 0; c < correction.cols(); ++c) row(0, c) = correction(desired_pos, c);
        // stash the lambda_inv row alongside via a second matrix row
        Matrix beta(1, lambda_inv.cols());
        for (long long c = 0; c < lambda_inv.cols(); ++c) beta(0, c) = lambda_inv(desired_pos, c);
        correction = row.hcat(beta);  // [c_1..c_Ng | beta_1..beta_nug]
    }

    const long long seg = M >= 2 ? ipow(M - 1, n - 1) : 1;
    for (long long l = 1; l <= p.blocks; ++l) {
        for (int m = 1; m <= M; ++m) {
            if (m == M) {
                const long long t_res = resolution_slot(n, l, p);
                if (pattern.modes[static_cast<std::size_t>(t_res - 1)] != M)
                    throw alignment_error("structured_decoder: resolution slot of a desired block is not in mode M");
                dec.slot_index.push_back(t_res - 1);
                dec.coeff.emplace_back(1.0, 0.0);
                dec.row_offsets.push_back(static_cast<long long>(dec.slot_index.size()));
                continue;
            }
            // find the in-round slot where block l of message n is seen in mode m
            const long long h = (l - 1) / seg;
            const long long j = mod1(l, static_cast<int>(seg));
            long long in_round = -1;
            for (long long i = 0; i <= M - 2; ++i) {
                const long long t = h * seg * (M - 1) + i * seg + j;
                if (pattern.first_phase[static_cast<std::size_t>(t - 1)] == m) {
                    in_round = t;
                    break;
                }
            }
            if (in_round < 0)
                throw alignment_error("structured_decoder: desired message " + std::to_string(n) +
                                      " never observed in mode " + std::to_string(m) + " for block " +
                                      std::to_string(l));
            // lambda^{-1} combination of the per-round observations at in_round
            for (int v = 0; v < p.per_rx_messages; ++v) {
                const cplx beta = correction(0, p.num_messages + v);
                dec.slot_index.push_back(static_cast<long long>(v) * p.round_slots + in_round - 1);
                dec.coeff.push_back(beta);
            }
            // cancel every undesired message via its resolution observation
            for (int other = 1; other <= p.num_messages; ++other) {
                if (contains_sorted(desired, other)) continue;
                const cplx c = correction(0, other - 1);
                if (std::abs(c) <= 1e-14) continue;
                const long long other_block = block_index(other, in_round, p);
                const long long t_res = resolution_slot(other, other_block, p);
                if (pattern.modes[static_cast<std::size_t>(t_res - 1)] !=
                    pattern.first_phase[static_cast<std::size_t>(in_round - 1)])
                    throw alignment_error(
                        "structured_decoder: interference of message " + std::to_string(other) +
                        " observed in a different mode than its resolution slot");
                dec.slot_index.push_back(t_res - 1);
                dec.coeff.push_back(-c);
            }
            dec.row_offsets.push_back(static_cast<long long>(dec.slot_index.size()));
        }
    }
    return dec;
}

double decoder_residual(const SparseDecoder& dec, const SwitchingPattern& pattern, int target,
                        const PrecoderGrid& grid) {
    double worst = 0.0;
    std::vector<std::pair<long long, cplx>> acc;
    for (long long r = 0; r < dec.out_dim; ++r) {
        acc.clear();
        for (long long i = dec.row_offsets[static_cast<std::size_t>(r)];
             i < dec.row_offsets[static_cast<std::size_t>(r + 1)]; ++i) {
            const long long t = dec.slot_index[static_cast<std::size_t>(i)] + 1;
            const ModeEntry entry = effective_mode_entry(pattern, target, t, grid);
            if (!entry.nonzero) continue;
            const cplx add = dec.coeff[static_cast<std::size_t>(i)] * entry.value;
            bool merged = false;
            for (auto& e : acc) {
                if (e.first == entry.col) {
                    e.second += add;
                    merged = true;
                    break;
                }
            }
            if (!merged) acc.emplace_back(entry.col, add);
        }
        bool diag_seen = false;
        for (const auto& e : acc) {
            cplx expected{};
            if (target == dec.message && e.first == r) {
                expected = 1.0;
                diag_seen = true;
            }
            worst = std::max(worst, std::abs(e.second - expected));
        }
        if (target == dec.message && !diag_seen) worst = std::max(worst, 1.0);
    }
    return worst;
}

SchemeDimensions scheme_dimensions(const SchemeParams& p) {
    SchemeDimensions dims;
    dims.blocks = p.blocks;
    dims.streams = p.streams;
    dims.slots = p.slots;
    dims.dof_message = Rational(p.streams, p.slots);
    dims.dof_sum = Rational(p.num_messages, 1) * dims.dof_message;
    return dims;
}

Matrix transmit_matrix(const PrecoderGrid& grid, const std::vector<std::vector<cplx>>& messages) {
    const SchemeParams& p = grid.params();
    if (static_cast<int>(messages.size()) != p.num_messages)
        throw parameter_error("transmit_matrix: need one symbol vector per message");
    for (const auto& w : messages) {
        if (static_cast<long long>(w.size()) != p.streams)
            throw parameter_error("transmit_matrix: each message must carry L = M*l symbols");
    }
    Matrix x(p.slots, p.modes);
    // per-message block schedule over one round
    std::vector<std::vector<int>> ftab(static_cast<std::size_t>(p.num_messages));
    for (int n = 1; n <= p.num_messages; ++n) {
        auto& tab = ftab[static_cast<std::size_t>(n - 1)];
        tab.resize(static_cast<std::size_t>(p.round_slots));
        for (long long t = 1; t <= p.round_slots; ++t)
            tab[static_cast<std::size_t>(t - 1)] = static_cast<int>(block_index(n, t, p));
    }
    const long long phase_total = static_cast<long long>(p.per_rx_messages) * p.round_slots;
    for (long long t = 1; t <= phase_total; ++t) {
        const long long round = (t - 1) / p.round_slots;
        const long long in_round = t - round * p.round_slots;
        cplx* dst = x.row_ptr(t - 1);
        for (int n = 1; n <= p.num_messages; ++n) {
            const cplx scale = grid.lambda()(round, n - 1);
            const long long block = ftab[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(in_round - 1)];
            const cplx* w = messages[static_cast<std::size_t>(n - 1)].data() + (block - 1) * p.modes;
            for (int a = 0; a < p.modes; ++a) dst[a] += scale * w[a];
        }
    }
    for (long long u = 1; u <= static_cast<long long>(p.num_messages) * p.blocks; ++u) {
        const int owner = static_cast<int>((u - 1) / p.blocks) + 1;
        const long long block = mod1(u, static_cast<int>(p.blocks));
        cplx* dst = x.row_ptr(phase_total + u - 1);
        const cplx* w = messages[static_cast<std::size_t>(owner - 1)].data() + (block - 1) * p.modes;
        for (int a = 0; a < p.modes; ++a) dst[a] = w[a];
    }
    return x;
}

std::vector<cplx> invert_blocks(std::span<const cplx> projected, const Matrix& h_inv) {
    const long long m = h_inv.rows();
    if (projected.size() % static_cast<std::size_t>(m) != 0)
        throw parameter_error("invert_blocks: length not a multiple of the block size");
    std::vector<cplx> out(projected.size());
    const long long blocks = static_cast<long long>(projected.size()) / m;
    for (long long l = 0; l < blocks; ++l) {
        for (long long r = 0; r < m; ++r) {
            cplx acc{};
            for (long long c = 0; c < m; ++c) acc += h_inv(r, c) * projected[static_cast<std::size_t>(l * m + c)];
            out[static_cast<std::size_t>(l * m + r)] = acc;
        }
    }
    return out;
}

}  // namespace bia::bcgm
