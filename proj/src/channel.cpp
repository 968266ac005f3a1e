#include "bia/channel.hpp"

#include <cmath>
#include <string>

#include "bia/errors.hpp"

namespace bia {
namespace {

constexpr std::uint64_t kChannelTag = 0x6368616e;  // stream domain separators
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;

}  // namespace

ChannelBook::ChannelBook(int receivers, int modes, int antennas, long long blocks,
                         long long coherence_slots, std::uint64_t seed)
    : receivers_(receivers),
      modes_(modes),
      antennas_(antennas),
      blocks_(blocks),
      coherence_slots_(coherence_slots),
      seed_(seed) {
    if (receivers < 1 || modes < 1 || antennas < 1 || blocks < 1 || coherence_slots < 1)
        throw parameter_error("ChannelBook: all counts must be >= 1");
    entries_.resize(static_cast<std::size_t>(receivers) * modes * blocks * antennas);
    const RandomStream root(seed);
    std::size_t idx = 0;
    for (int k = 1; k <= receivers; ++k) {
        for (int m = 1; m <= modes; ++m) {
            for (long long q = 1; q <= blocks; ++q) {
                const RandomStream s = root.fork({kChannelTag, static_cast<std::uint64_t>(k),
                                                  static_cast<std::uint64_t>(m),
                                                  static_cast<std::uint64_t>(q)});
                for (int a = 0; a < antennas; ++a) entries_[idx++] = s.cnormal(static_cast<std::uint64_t>(a));
            }
        }
    }
}

std::span<const cplx> ChannelBook::vector(int k, int m, long long q) const {
    if (k < 1 || k > receivers_ || m < 1 || m > modes_ || q < 1 || q > blocks_)
        throw parameter_error("ChannelBook::vector: index out of range");
    const std::size_t base =
        ((static_cast<std::size_t>(k - 1) * modes_ + (m - 1)) * blocks_ + (q - 1)) * antennas_;
    return {entries_.data() + base, static_cast<std::size_t>(antennas_)};
}

Matrix ChannelBook::receiver_channel_matrix(int k, long long q) const {
    Matrix h(modes_, antennas_);
    for (int m = 1; m <= modes_; ++m) {
        const auto v = vector(k, m, q);
        for (int a = 0; a < antennas_; ++a) h(m - 1, a) = v[static_cast<std::size_t>(a)];
    }
    return h;
}

ChannelBook draw_channels(int receivers, int modes, int antennas, long long blocks,
                          long long coherence_slots, std::uint64_t seed) {
    return ChannelBook(receivers, modes, antennas, blocks, coherence_slots, seed);
}

ReceivedSignal receive(const ChannelBook& book, int k, std::span<const std::uint8_t> modes,
                       const Matrix& x, double sigma2, std::uint64_t noise_stream) {
    if (static_cast<long long>(modes.size()) != x.rows())
        throw parameter_error("receive: pattern length must match the transmit duration");
    if (x.cols() != book.antennas())
        throw parameter_error("receive: transmit matrix has " + std::to_string(x.cols()) +
                              " antennas, book has " + std::to_string(book.antennas()));
    if (sigma2 < 0) throw parameter_error("receive: negative noise variance");
    ReceivedSignal y;
    y.receiver = k;
    y.noise_variance = sigma2;
    y.samples.resize(static_cast<std::size_t>(x.rows()));
    const RandomStream noise = RandomStream(book.seed())
                                   .fork({kNoiseTag, static_cast<std::uint64_t>(k), noise_stream});
    const double sigma = std::sqrt(sigma2);
    for (long long t = 1; t <= x.rows(); ++t) {
        const long long q = std::min(book.block_of_slot(t), book.blocks());
        const auto h = book.vector(k, modes[static_cast<std::size_t>(t - 1)], q);
        cplx acc{};
        const cplx* row = x.row_ptr(t - 1);
        for (int a = 0; a < book.antennas(); ++a) acc += h[static_cast<std::size_t>(a)] * row[a];
        if (sigma > 0) acc += sigma * noise.cnormal(static_cast<std::uint64_t>(t - 1));
        y.samples[static_cast<std::size_t>(t - 1)] = acc;
    }
    return y;
}

std::pair<Matrix, double> power_normalize(const Matrix& x, double power) {
    if (power <= 0) throw parameter_error("power_normalize: power must be positive");
    const double amp = x.max_abs();
    const double scale = amp > 0 ? std::sqrt(power) / amp : std::sqrt(power);
    return {x * cplx{scale, 0.0}, scale};
}

}  // namespace bia
