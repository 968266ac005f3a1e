#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bia/combinatorics.hpp"
#include "bia/matrix.hpp"
#include "bia/rational.hpp"

namespace bia::bcgm {

/// Parameters of a (K, G, M) groupcast scheme together with the derived
/// dimensions. With N_g = binomial(K, G) messages and nu_g = binomial(K-1,
/// G-1) messages per receiver, each message carries streams = M * blocks
/// symbols, blocks = (M-1)^(N_g-1), and the scheme spans
/// slots = nu_g (M-1) blocks + N_g blocks channel uses.
///
/// M = 1 degenerates to one slot per message (blocks = 1, no alignment
/// rounds), which is plain orthogonal multicast.
struct SchemeParams {
    int users = 0;             // K
    int group_size = 0;        // G
    int modes = 0;             // M
    int num_messages = 0;      // N_g
    int per_rx_messages = 0;   // nu_g
    long long blocks = 0;      // l
    long long streams = 0;     // L = M l
    long long round_slots = 0; // (M-1) l, length of one alignment round
    long long slots = 0;       // T_p
    GroupTable groups{0, 0, {}};

    static SchemeParams make(int K, int G, int M);

    bool desires(int k, int n) const { return groups.contains(n, k); }
};

/// Largest scheme duration the constructors accept.
inline constexpr long long kMaxSlots = 1'000'000;

/// Block scheduled for message n at in-round slot t (both 1-based):
/// f_n(t) = floor((t-1)/(M-1)^n) (M-1)^(n-1) + mod1(t, (M-1)^(n-1)).
long long block_index(int n, long long t, const SchemeParams& p);

/// Row-selector Pi_n ((M-1)l x l): row t is basis row f_n(t). Dense, desk
/// scale only.
Matrix selection_matrix(int n, const SchemeParams& p);

/// T_n = Pi_n (Kronecker) I_M: per-round precoder of message n.
Matrix alignment_precoder(int n, const SchemeParams& p);

/// U_n: identity placement of message n's blocks over the last N_g l slots.
Matrix resolution_precoder(int n, const SchemeParams& p);

/// Full stacked precoder V_n = [T_n; lambda_{2,n} T_n; ...; U_n]
/// ((slots * M) x streams). lambda must be nu_g x N_g with an all-ones first
/// row.
Matrix full_precoder(int n, const Matrix& lambda, const SchemeParams& p);

/// Coefficient view of the transmit schedule: alpha(n, t, l) is the scalar
/// applied to block l of message n at slot t. Evaluated from the slot
/// structure in O(1) instead of materializing the V_n.
class PrecoderGrid {
public:
    PrecoderGrid(SchemeParams params, Matrix lambda);

    const SchemeParams& params() const { return params_; }
    const Matrix& lambda() const { return lambda_; }

    struct Slot {
        long long block = 0;  // 0 when message n sends nothing at t
        cplx coeff{};
    };
    /// The single block of message n active at slot t (1-based).
    Slot slot_of(int n, long long t) const;

    cplx alpha(int n, long long t, long long block) const;

    /// Worst per-antenna amplification of unit-power symbols over all slots;
    /// the power normalizer divides by this.
    double peak_amplification() const;

private:
    SchemeParams params_;
    Matrix lambda_;
};

/// Receiver mode schedule. first_phase is the Algorithm-generated prefix
/// p_k over one round; modes covers all slots (nu_g copies of p_k, then the
/// resolution phase).
struct SwitchingPattern {
    int receiver = 0;
    std::vector<std::uint8_t> first_phase;
    std::vector<std::uint8_t> modes;
};

/// Iterative first-phase pattern for a receiver desiring `desired` (sorted,
/// 1-based message indices): initialized from message 1, then extended per
/// message by shifting (desired) or repeating (undesired) the prefix built so
/// far.
std::vector<std::uint8_t> first_phase_pattern(const std::vector<int>& desired, const SchemeParams& p);

struct AlignmentCheck {
    bool pass = true;
    int message = 0;     // first offending message n
    long long h = -1, j = -1, i = -1;
    long long slot = 0;  // offending in-round slot t
    std::string detail;
};

/// Checks the intra-message alignment condition: over each repeat group of
/// in-round slots, undesired messages see one constant mode in [1..M-1] and
/// desired messages see all M-1 modes cyclically.
AlignmentCheck verify_alignment(std::span<const std::uint8_t> first_phase,
                                const std::vector<int>& desired, const SchemeParams& p);

/// Mode in which receiver k observes block l of message n throughout the
/// first phase; well-defined for undesired n (asserted against every repeat).
std::uint8_t interference_mode(std::span<const std::uint8_t> first_phase, int n, long long block,
                               const SchemeParams& p);

/// Full mode schedule for receiver k: repeated first phase, then mode M for
/// desired blocks and the matching interference mode for undesired blocks.
SwitchingPattern switching_pattern_full(int k, const SchemeParams& p);

/// Slot index (1-based) at which block l of message n is broadcast alone.
long long resolution_slot(int n, long long block, const SchemeParams& p);

/// Sparse row of the mode-selection matrix E_{k,n}: at most one nonzero per
/// slot, at column (block-1)*M + mode.
struct ModeEntry {
    bool nonzero = false;
    long long col = 0;  // 0-based column in [0, streams)
    cplx value{};
};
ModeEntry effective_mode_entry(const SwitchingPattern& pattern, int n, long long t,
                               const PrecoderGrid& grid);

/// Dense E_{k,n} (slots x streams); desk scale only.
Matrix effective_mode_matrix(const SwitchingPattern& pattern, int n, const PrecoderGrid& grid);

/// Exact rank of E_{k,n}: its rows are scaled basis vectors, so the rank is
/// the number of distinct columns hit.
long long structural_rank(const SwitchingPattern& pattern, int n, const PrecoderGrid& grid);

/// Exact rank of the stacked family [E_{k,1} | ... | E_{k,N_g}] via sparse
/// elimination. Equals slots exactly when the scheme is decodable.
long long union_structural_rank(const SwitchingPattern& pattern, const PrecoderGrid& grid);

/// Dense decoders D_{k,n} for every desired n (parallel to
/// desired_indices(k)), via least squares on the stacked family.
std::vector<Matrix> decoder_matrices(int k, const SwitchingPattern& pattern, const PrecoderGrid& grid);

/// Sparse decoder assembled from the scheme structure: resolution slots give
/// mode-M and interference combinations directly, the per-round stacks are
/// inverted through lambda restricted to the desired set, and interference is
/// cancelled with the resolution observations.
struct SparseDecoder {
    int receiver = 0;
    int message = 0;
    long long out_dim = 0;  // streams
    std::vector<long long> row_offsets;  // out_dim + 1
    std::vector<long long> slot_index;   // 0-based slots
    std::vector<cplx> coeff;

    std::vector<cplx> apply(std::span<const cplx> y) const;
    Matrix dense_transposed(long long slots) const;  // out_dim x slots, desk scale
};
SparseDecoder structured_decoder(int k, int n, const SwitchingPattern& pattern, const PrecoderGrid& grid);

/// Exact max-abs deviation of D^T E_{k,target} from its expected value
/// (identity when target == decoder message, zero otherwise).
double decoder_residual(const SparseDecoder& dec, const SwitchingPattern& pattern, int target,
                        const PrecoderGrid& grid);

struct SchemeDimensions {
    long long blocks = 0;
    long long streams = 0;
    long long slots = 0;
    Rational dof_message;
    Rational dof_sum;
};
SchemeDimensions scheme_dimensions(const SchemeParams& p);

/// Transmit matrix X (slots x M) for the given per-message symbol vectors
/// (each of length streams), built slot by slot.
Matrix transmit_matrix(const PrecoderGrid& grid, const std::vector<std::vector<cplx>>& messages);

/// Per-block channel inversion of a projected observation r = blkdiag(H) w:
/// returns w given H^{-1}.
std::vector<cplx> invert_blocks(std::span<const cplx> projected, const Matrix& h_inv);

}  // namespace bia::bcgm
