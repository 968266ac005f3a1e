#include "bia/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "bia/errors.hpp"
#include "bia/linalg.hpp"
#include "bia/rng.hpp"

namespace bia::metrics {
namespace {

constexpr std::uint64_t kTrialTag = 0x7472696c;
constexpr long long kMaxRateStreams = 512;

double log2det_ratio(const Matrix& noise_cov, const Matrix& signal, double symbol_power) {
    // log2 det(I + p C^{-1} S) = (ln det(C + p S) - ln det(C)) / ln 2
    Matrix sum = noise_cov;
    for (long long r = 0; r < sum.rows(); ++r)
        for (long long c = 0; c < sum.cols(); ++c) sum(r, c) += symbol_power * signal(r, c);
    return (cholesky_logdet(sum) - cholesky_logdet(noise_cov)) / std::log(2.0);
}

Matrix replicate_blocks(const Matrix& block, long long copies) {
    Matrix out(block.rows() * copies, block.cols() * copies);
    for (long long b = 0; b < copies; ++b)
        for (long long r = 0; r < block.rows(); ++r)
            for (long long c = 0; c < block.cols(); ++c)
                out(b * block.rows() + r, b * block.cols() + c) = block(r, c);
    return out;
}

Matrix decoder_noise_covariance(const bcgm::SparseDecoder& dec) {
    // cov(D^T z) = N N^H with N = D^T, accumulated over shared slots
    Matrix cov(dec.out_dim, dec.out_dim);
    std::unordered_map<long long, std::vector<std::pair<long long, cplx>>> by_slot;
    for (long long r = 0; r < dec.out_dim; ++r) {
        for (long long i = dec.row_offsets[static_cast<std::size_t>(r)];
             i < dec.row_offsets[static_cast<std::size_t>(r + 1)]; ++i)
            by_slot[dec.slot_index[static_cast<std::size_t>(i)]].emplace_back(
                r, dec.coeff[static_cast<std::size_t>(i)]);
    }
    for (const auto& [slot, entries] : by_slot) {
        for (const auto& [r1, c1] : entries)
            for (const auto& [r2, c2] : entries) cov(r1, r2) += c1 * std::conj(c2);
    }
    return cov;
}

struct TrialStats {
    std::vector<double> sums;     // per snr point
    std::vector<double> sq_sums;  // per snr point
    double slope_sum = 0.0;
    double slope_sq_sum = 0.0;
};

void fill_curve(RateCurve& curve, const TrialStats& stats, const std::vector<double>& snr_db,
                int trials) {
    const double t = static_cast<double>(trials);
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        RatePoint pt;
        pt.snr_db = snr_db[i];
        pt.mean_rate = stats.sums[i] / t;
        const double var = std::max(0.0, stats.sq_sums[i] / t - pt.mean_rate * pt.mean_rate);
        pt.ci_halfwidth = 1.96 * std::sqrt(var / t);
        curve.points.push_back(pt);
    }
    curve.slope = stats.slope_sum / t;
    const double svar = std::max(0.0, stats.slope_sq_sum / t - curve.slope * curve.slope);
    curve.slope_ci_halfwidth = 1.96 * std::sqrt(svar / t);
}

}  // namespace

Rational dof_bcgm(int K, int G, int M) {
    if (K < 1 || G < 1 || G > K || M < 1) throw parameter_error("dof_bcgm: invalid parameters");
    const long long ng = binomial(K, G);
    const long long nug = binomial(K - 1, G - 1);
    return Rational(ng * M, (M - 1) * nug + ng);
}

Rational dof_bcgm_asym(int K, int G, int M_tx, int M_rx) {
    if (M_tx < 1 || M_rx < 1) throw parameter_error("dof_bcgm_asym: invalid antenna counts");
    return dof_bcgm(K, G, std::min(M_tx, M_rx));
}

DofBounds dof_usi(int K, int G, int M) {
    if (K < 1 || G < 1 || G > K || M < 1) throw parameter_error("dof_usi: invalid parameters");
    const long long ng = binomial(K, G);
    const long long nug = binomial(K - 1, G - 1);
    const auto value = [&](long long m) {
        return Rational(static_cast<long long>(G) * ng * m, (m - 1) * nug + ng);
    };
    DofBounds bounds;
    if (G == 1) {
        bounds.achievable = dof_bcgm(K, 1, M);
        bounds.upper = bounds.achievable;
        bounds.tight = true;
        return bounds;
    }
    bounds.upper = value(M);
    if (M <= G - 1) {
        bounds.achievable = bounds.upper;
        bounds.tight = true;
    } else {
        bounds.achievable = value(G - 1);
        bounds.tight = bounds.achievable == bounds.upper;
    }
    return bounds;
}

DofBounds dof_mapreduce(int K, int r, int M) {
    if (r < 1 || r > K - 1) throw parameter_error("dof_mapreduce: need 1 <= r <= K-1");
    if (M < 1) throw parameter_error("dof_mapreduce: need M >= 1");
    const auto value = [&](long long m) {
        return Rational(static_cast<long long>(K) * (r + 1) * m, (m - 1) * (r + 1) + K);
    };
    DofBounds bounds;
    bounds.upper = value(M);
    if (M <= r) {
        bounds.achievable = bounds.upper;
        bounds.tight = true;
    } else {
        bounds.achievable = value(r);
        bounds.tight = bounds.achievable == bounds.upper;
    }
    return bounds;
}

Rational dimension_count(const sim::DecodingReport& report) {
    if (report.sigma2 != 0.0)
        throw decoding_error("dimension_count: requires a noiseless run");
    if (!(report.worst_rel_error < 1e-8))
        throw decoding_error("dimension_count: recovery error above tolerance");
    if (report.effective_modes >= 2) {
        bool have_diag = false;
        for (const auto& rx : report.receivers) {
            if (rx.family_ranks.empty()) continue;
            have_diag = true;
            long long total = 0;
            for (long long r : rx.family_ranks) total += r;
            if (total != report.slots || rx.union_rank != report.slots)
                throw decoding_error("dimension_count: rank deficiency at receiver " +
                                     std::to_string(rx.receiver));
        }
        if (!have_diag)
            throw decoding_error("dimension_count: run carries no rank diagnostics");
    }
    return Rational(report.streams, report.slots);
}

RateCurve estimate_rate_curve(const RateSetting& setting, const std::vector<double>& snr_db,
                              int trials, std::uint64_t seed) {
    if (snr_db.size() < 2) throw parameter_error("estimate_rate_curve: need at least two SNR points");
    if (trials < 1) throw parameter_error("estimate_rate_curve: need trials >= 1");
    std::vector<double> powers;
    powers.reserve(snr_db.size());
    for (double s : snr_db) powers.push_back(std::pow(10.0, s / 10.0));
    const double dlog2p = (std::log2(powers.back()) - std::log2(powers[powers.size() - 2]));

    RateCurve curve;
    TrialStats stats;
    stats.sums.assign(snr_db.size(), 0.0);
    stats.sq_sums.assign(snr_db.size(), 0.0);
    const RandomStream root(seed);

    auto accumulate = [&](const std::vector<double>& rates) {
        for (std::size_t i = 0; i < rates.size(); ++i) {
            stats.sums[i] += rates[i];
            stats.sq_sums[i] += rates[i] * rates[i];
        }
        const double slope = (rates.back() - rates[rates.size() - 2]) / dlog2p;
        stats.slope_sum += slope;
        stats.slope_sq_sum += slope * slope;
    };

    if (setting.kind == RateSetting::Kind::mimo) {
        const int M = setting.modes;
        if (M < 1) throw parameter_error("estimate_rate_curve: mimo control needs M >= 1");
        curve.formula_dof = Rational(M, 1);
        for (int trial = 0; trial < trials; ++trial) {
            const RandomStream s = root.fork({kTrialTag, static_cast<std::uint64_t>(trial)});
            Matrix h(M, M);
            for (int r = 0; r < M; ++r)
                for (int c = 0; c < M; ++c)
                    h(r, c) = s.cnormal(static_cast<std::uint64_t>(r * M + c));
            const Matrix hh = h * h.conj_transpose();
            std::vector<double> rates;
            rates.reserve(powers.size());
            for (double p : powers) rates.push_back(log2det_ratio(Matrix::identity(M), hh, p));
            accumulate(rates);
        }
        fill_curve(curve, stats, snr_db, trials);
        return curve;
    }

    const int K = setting.users;
    const int G = setting.group_size;
    const int M = setting.modes;

    if (setting.kind == RateSetting::Kind::bcgm) {
        const auto params = bcgm::SchemeParams::make(K, G, M);
        if (params.streams > kMaxRateStreams)
            throw size_error("estimate_rate_curve: scheme streams too large for dense rate evaluation");
        const auto lambda = vandermonde_mds(params.per_rx_messages, params.num_messages);
        const bcgm::PrecoderGrid grid(params, lambda.base);
        curve.formula_dof = dof_bcgm(K, G, M);

        struct RxData {
            std::vector<int> desired;
            std::vector<Matrix> noise_cov;  // per desired message
        };
        std::vector<RxData> rx(static_cast<std::size_t>(K));
        for (int k = 1; k <= K; ++k) {
            const auto pattern = bcgm::switching_pattern_full(k, params);
            auto& data = rx[static_cast<std::size_t>(k - 1)];
            data.desired = desired_indices(k, params.groups);
            for (int n : data.desired)
                data.noise_cov.push_back(
                    decoder_noise_covariance(bcgm::structured_decoder(k, n, pattern, grid)));
        }
        for (int trial = 0; trial < trials; ++trial) {
            const std::uint64_t trial_seed =
                root.fork({kTrialTag, static_cast<std::uint64_t>(trial)}).word(0);
            const ChannelBook book = draw_channels(K, M, M, 1, params.slots, trial_seed);
            std::vector<double> rates(powers.size(), 0.0);
            for (int n = 1; n <= params.num_messages; ++n) {
                for (std::size_t pi = 0; pi < powers.size(); ++pi) {
                    double worst = 0.0;
                    bool first = true;
                    for (int k : params.groups.group(n)) {
                        const auto& data = rx[static_cast<std::size_t>(k - 1)];
                        const std::size_t slot =
                            std::lower_bound(data.desired.begin(), data.desired.end(), n) -
                            data.desired.begin();
                        const Matrix h = book.receiver_channel_matrix(k);
                        const Matrix signal = replicate_blocks(h * h.conj_transpose(), params.blocks);
                        const double mi = log2det_ratio(data.noise_cov[slot], signal, powers[pi]);
                        if (first || mi < worst) worst = mi;
                        first = false;
                    }
                    rates[pi] += worst / static_cast<double>(params.slots);
                }
            }
            accumulate(rates);
        }
        fill_curve(curve, stats, snr_db, trials);
        return curve;
    }

    // unicast with side information
    const auto bounds = dof_usi(K, G, M);
    curve.formula_dof = bounds.achievable;
    const auto table = usi::build_table(K, G, M);
    if (table.effective == 1) {
        const auto schedule = usi::m1_schedule(K, G);
        const long long n_g = table.groups.group_count();
        for (int trial = 0; trial < trials; ++trial) {
            const std::uint64_t trial_seed =
                root.fork({kTrialTag, static_cast<std::uint64_t>(trial)}).word(0);
            const ChannelBook book = draw_channels(K, std::max(M, 1), K, 1, n_g, trial_seed);
            std::vector<double> rates(powers.size(), 0.0);
            for (const auto& slot : schedule) {
                for (const auto& a : slot) {
                    const int dest = table.info(a.super_message, a.position).destination;
                    const cplx gain = book.vector(dest, 1, 1)[static_cast<std::size_t>(a.transmitter - 1)];
                    for (std::size_t pi = 0; pi < powers.size(); ++pi)
                        rates[pi] += std::log2(1.0 + powers[pi] * std::norm(gain)) /
                                     static_cast<double>(n_g);
                }
            }
            accumulate(rates);
        }
        fill_curve(curve, stats, snr_db, trials);
        return curve;
    }

    const auto params = bcgm::SchemeParams::make(K, G, table.effective);
    if (params.streams > kMaxRateStreams)
        throw size_error("estimate_rate_curve: scheme streams too large for dense rate evaluation");
    const auto lambda = vandermonde_mds(params.per_rx_messages, params.num_messages);
    const bcgm::PrecoderGrid grid(params, lambda.base);

    struct RxData {
        std::vector<int> desired;
        std::vector<Matrix> noise_cov;
    };
    std::vector<RxData> rx(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        const auto pattern = bcgm::switching_pattern_full(k, params);
        auto& data = rx[static_cast<std::size_t>(k - 1)];
        data.desired = desired_indices(k, params.groups);
        for (int n : data.desired)
            data.noise_cov.push_back(
                decoder_noise_covariance(bcgm::structured_decoder(k, n, pattern, grid)));
    }
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed =
            root.fork({kTrialTag, static_cast<std::uint64_t>(trial)}).word(0);
        const ChannelBook book = draw_channels(K, std::max(M, table.effective), K, 1, params.slots,
                                               trial_seed);
        std::vector<double> rates(powers.size(), 0.0);
        for (int n = 1; n <= params.num_messages; ++n) {
            for (int g = 1; g <= G; ++g) {
                const usi::MessageInfo& info = table.info(n, g);
                const int k = info.destination;
                const auto& data = rx[static_cast<std::size_t>(k - 1)];
                const std::size_t slot =
                    std::lower_bound(data.desired.begin(), data.desired.end(), n) - data.desired.begin();
                const Matrix h = usi::block_channel(book, k, info, table.effective);
                const Matrix signal = replicate_blocks(h * h.conj_transpose(), params.blocks);
                for (std::size_t pi = 0; pi < powers.size(); ++pi) {
                    const double mi = log2det_ratio(data.noise_cov[slot], signal, powers[pi]);
                    rates[pi] += mi / static_cast<double>(params.slots);
                }
            }
        }
        accumulate(rates);
    }
    fill_curve(curve, stats, snr_db, trials);
    return curve;
}

std::string rate_curve_csv(const RateCurve& curve) {
    std::string out = "snr_db,mean_rate,ci_halfwidth\n";
    char buf[128];
    for (const RatePoint& pt : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.10g,%.10g\n", pt.snr_db, pt.mean_rate, pt.ci_halfwidth);
        out += buf;
    }
    return out;
}

}  // namespace bia::metrics
