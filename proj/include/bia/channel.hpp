#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bia/matrix.hpp"
#include "bia/rng.hpp"

namespace bia {

/// Rayleigh block-fading coefficients for every (receiver, mode, coherence
/// block): a 1 x antennas vector drawn i.i.d. CN(0,1), constant within a
/// block, redrawn across blocks. Entirely determined by the seed.
class ChannelBook {
public:
    ChannelBook(int receivers, int modes, int antennas, long long blocks, long long coherence_slots,
                std::uint64_t seed);

    int receivers() const { return receivers_; }
    int modes() const { return modes_; }
    int antennas() const { return antennas_; }
    long long blocks() const { return blocks_; }
    long long coherence_slots() const { return coherence_slots_; }
    std::uint64_t seed() const { return seed_; }

    /// h_k^{[m]} for coherence block q (all arguments 1-based).
    std::span<const cplx> vector(int k, int m, long long q) const;

    long long block_of_slot(long long t) const { return (t + coherence_slots_ - 1) / coherence_slots_; }

    /// M x A stack of all mode vectors of receiver k in block q.
    Matrix receiver_channel_matrix(int k, long long q = 1) const;

private:
    int receivers_, modes_, antennas_;
    long long blocks_, coherence_slots_;
    std::uint64_t seed_;
    std::vector<cplx> entries_;
};

ChannelBook draw_channels(int receivers, int modes, int antennas, long long blocks,
                          long long coherence_slots, std::uint64_t seed);

struct ReceivedSignal {
    int receiver = 0;
    std::vector<cplx> samples;
    double noise_variance = 0.0;
};

/// y_k(t) = h_k^{[m_k(t)]}(t) x(t) + z_k(t). Noise is drawn from the
/// substream (seed, receiver, noise_stream) so repeated calls with distinct
/// stream ids give independent, reproducible noise; sigma2 = 0 is exactly
/// noiseless.
ReceivedSignal receive(const ChannelBook& book, int k, std::span<const std::uint8_t> modes,
                       const Matrix& x, double sigma2, std::uint64_t noise_stream = 0);

/// Single-scalar power normalization: entries of x are per-symbol
/// amplification factors of unit-power streams, and the returned scale makes
/// the worst (slot, antenna) meet E|x|^2 <= power. Returns (scaled, scale).
std::pair<Matrix, double> power_normalize(const Matrix& x, double power);

}  // namespace bia
