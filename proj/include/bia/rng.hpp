#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace bia {

/// Counter-based deterministic random stream. Every draw is a pure function of
/// (key words..., counter), so independent substreams can be declared by key
/// and evaluated in any order, on any thread, with identical results.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

    /// Derive a substream by folding additional key words into the state.
    RandomStream fork(std::initializer_list<std::uint64_t> key) const {
        RandomStream s(*this);
        for (std::uint64_t w : key) s.state_ = mix(s.state_ ^ (w + 0x9e3779b97f4a7c15ULL));
        return s;
    }

    /// i-th uint64 of the stream (counter access, no mutation).
    std::uint64_t word(std::uint64_t i) const { return mix(state_ + (i + 1) * 0x9e3779b97f4a7c15ULL); }

    /// i-th uniform double in (0, 1].
    double uniform(std::uint64_t i) const {
        return (static_cast<double>(word(i) >> 11) + 1.0) * 0x1.0p-53;
    }

    /// i-th circularly-symmetric complex normal CN(0,1) value, via Box-Muller.
    /// Real and imaginary parts each have variance 1/2.
    std::complex<double> cnormal(std::uint64_t i) const {
        const double u1 = uniform(2 * i);
        const double u2 = uniform(2 * i + 1);
        const double r = std::sqrt(-std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace bia
