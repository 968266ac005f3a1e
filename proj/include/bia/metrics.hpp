#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bia/rational.hpp"
#include "bia/simulate.hpp"

namespace bia::metrics {

/// Sum DoF of the (K, G, M) groupcast setting: N_g M / ((M-1) nu_g + N_g).
Rational dof_bcgm(int K, int G, int M);

/// Asymmetric antenna counts collapse to min(M_tx, M_rx).
Rational dof_bcgm_asym(int K, int G, int M_tx, int M_rx);

struct DofBounds {
    Rational achievable;
    Rational upper;
    bool tight = false;  // achievable == upper (settled regime)
};

/// Sum DoF of the (K, G, M) unicast-with-side-information setting:
/// G N_g M / ((M-1) nu_g + N_g) for M <= G-1 (tight); for M >= G the
/// achievable value clips M to G-1 while the upper bound keeps M.
DofBounds dof_usi(int K, int G, int M);

/// Sum DoF of the (K, r, M) shuffle: K(r+1)M / ((M-1)(r+1) + K) for M <= r
/// (tight); bounds otherwise. M = 1 gives r+1.
DofBounds dof_mapreduce(int K, int r, int M);

/// Delivered independent symbols per message over the scheme duration, from a
/// completed noiseless run with full-rank diagnostics. Throws decoding_error
/// when the run is noisy, lossy, or rank-deficient.
Rational dimension_count(const sim::DecodingReport& report);

struct RateSetting {
    enum class Kind { bcgm, usi, mimo } kind = Kind::bcgm;
    int users = 0;       // K (unused for mimo)
    int group_size = 0;  // G
    int modes = 0;       // M
};

struct RatePoint {
    double snr_db = 0.0;
    double mean_rate = 0.0;     // bits per channel use, summed over messages
    double ci_halfwidth = 0.0;  // 95% normal-approximation half width
};

struct RateCurve {
    std::vector<RatePoint> points;
    double slope = 0.0;  // bits per log2(P) between the top two SNR points
    double slope_ci_halfwidth = 0.0;
    Rational formula_dof;  // the matching closed-form value
};

/// Monte Carlo average of the post-processing mutual information: each trial
/// draws a channel book, propagates the decoder-induced noise covariance, and
/// evaluates log-det rates per message (minimum over the group in the
/// groupcast setting). The slope between the top two SNR points estimates the
/// DoF.
RateCurve estimate_rate_curve(const RateSetting& setting, const std::vector<double>& snr_db,
                              int trials, std::uint64_t seed);

std::string rate_curve_csv(const RateCurve& curve);

}  // namespace bia::metrics
