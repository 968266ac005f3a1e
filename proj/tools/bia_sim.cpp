// Command-line front end: scheme inspection, simulation runs, SNR sweeps, the
// shuffle demo, and the verification suite. Output is line-delimited JSON so
// runs diff cleanly; identical seeds give byte-identical output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bia/bcgm.hpp"
#include "bia/linalg.hpp"
#include "bia/errors.hpp"
#include "bia/mapreduce.hpp"
#include "bia/metrics.hpp"
#include "bia/simulate.hpp"
#include "bia/usi.hpp"

using json = nlohmann::json;

namespace {

struct ExperimentConfig {
    std::string mode = "bcgm";  // bcgm | usi | mapreduce | mimo
    int k = 0;
    int g = 0;
    int r = 0;
    int m = 1;
    int m_tx = 0;
    int m_rx = 0;
    std::vector<double> snr_db;
    int trials = 200;
    std::optional<std::uint64_t> seed;
    bool noiseless = false;
    std::string out;
    std::string config_path;
    std::string job_path;
    int k_max = 5;
    int m_max = 4;
    bool deep = false;
};

class Emitter {
public:
    explicit Emitter(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw bia::parameter_error("cannot open output file: " + path);
        }
    }
    void line(const std::string& s) {
        std::cout << s << "\n";
        if (file_.is_open()) file_ << s << "\n";
    }
    void record(const json& j) { line(j.dump()); }

private:
    std::ofstream file_;
};

void overlay_config_file(ExperimentConfig& cfg) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw bia::parameter_error("cannot open config file: " + cfg.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const json j = json::parse(ss.str());
    if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("g")) cfg.g = j["g"].get<int>();
    if (j.contains("r")) cfg.r = j["r"].get<int>();
    if (j.contains("m")) cfg.m = j["m"].get<int>();
    if (j.contains("m_tx")) cfg.m_tx = j["m_tx"].get<int>();
    if (j.contains("m_rx")) cfg.m_rx = j["m_rx"].get<int>();
    if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("noiseless")) cfg.noiseless = j["noiseless"].get<bool>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("BIA_SIM_SEED")) return std::strtoull(env, nullptr, 10);
    throw bia::parameter_error("stochastic runs need --seed (or BIA_SIM_SEED)");
}

double sigma2_from(const ExperimentConfig& cfg) {
    if (cfg.noiseless) return 0.0;
    return 1.0;  // unit-variance AWGN; transmit power carries the SNR
}

int effective_m(const ExperimentConfig& cfg) {
    if (cfg.m_tx > 0 || cfg.m_rx > 0) {
        const int tx = cfg.m_tx > 0 ? cfg.m_tx : cfg.m;
        const int rx = cfg.m_rx > 0 ? cfg.m_rx : cfg.m;
        return bia::usi::effective_modes_bcgm(tx, rx);
    }
    return cfg.m;
}

json scheme_record(const bia::bcgm::SchemeParams& p) {
    const auto dims = bia::bcgm::scheme_dimensions(p);
    json j;
    j["record"] = "scheme";
    j["k"] = p.users;
    j["g"] = p.group_size;
    j["m"] = p.modes;
    j["messages"] = p.num_messages;
    j["per_rx_messages"] = p.per_rx_messages;
    j["blocks"] = p.blocks;
    j["streams"] = p.streams;
    j["slots"] = p.slots;
    j["dof_message"] = dims.dof_message.str();
    j["dof_sum"] = dims.dof_sum.str();
    return j;
}

int cmd_dims(const ExperimentConfig& cfg, Emitter& out) {
    if (cfg.mode == "bcgm") {
        const int m = effective_m(cfg);
        const auto p = bia::bcgm::SchemeParams::make(cfg.k, cfg.g, m);
        json j = scheme_record(p);
        j["record"] = "dims";
        j["setting"] = "bcgm";
        if (cfg.m_tx > 0 || cfg.m_rx > 0) {
            j["m_tx"] = cfg.m_tx > 0 ? cfg.m_tx : cfg.m;
            j["m_rx"] = cfg.m_rx > 0 ? cfg.m_rx : cfg.m;
            j["dof_sum"] = bia::metrics::dof_bcgm_asym(cfg.k, cfg.g, cfg.m_tx > 0 ? cfg.m_tx : cfg.m,
                                                       cfg.m_rx > 0 ? cfg.m_rx : cfg.m)
                               .str();
        }
        out.record(j);
        return 0;
    }
    if (cfg.mode == "usi") {
        const auto bounds = bia::metrics::dof_usi(cfg.k, cfg.g, cfg.m);
        json j;
        j["record"] = "dims";
        j["setting"] = "usi";
        j["k"] = cfg.k;
        j["g"] = cfg.g;
        j["m"] = cfg.m;
        j["dof_achievable"] = bounds.achievable.str();
        j["dof_upper"] = bounds.upper.str();
        j["tight"] = bounds.tight;
        if (cfg.g >= 2) {
            const int m_eff = bia::usi::effective_modes(cfg.g, cfg.m);
            j["m_effective"] = m_eff;
            if (m_eff >= 2) {
                const auto p = bia::bcgm::SchemeParams::make(cfg.k, cfg.g, m_eff);
                j["slots"] = p.slots;
                j["streams"] = p.streams;
            } else {
                j["slots"] = bia::binomial(cfg.k, cfg.g);
                j["streams"] = 1;
            }
        }
        out.record(j);
        return 0;
    }
    if (cfg.mode == "mapreduce") {
        const auto bounds = bia::metrics::dof_mapreduce(cfg.k, cfg.r, cfg.m);
        json j;
        j["record"] = "dims";
        j["setting"] = "mapreduce";
        j["k"] = cfg.k;
        j["r"] = cfg.r;
        j["m"] = cfg.m;
        j["files"] = bia::binomial(cfg.k, cfg.r);
        j["effective_ivas"] = (cfg.k - cfg.r) * bia::binomial(cfg.k, cfg.r);
        j["usi_g"] = cfg.r + 1;
        j["dof_achievable"] = bounds.achievable.str();
        j["dof_upper"] = bounds.upper.str();
        j["tight"] = bounds.tight;
        out.record(j);
        return 0;
    }
    throw bia::parameter_error("dims: unknown --mode " + cfg.mode);
}

int cmd_pattern(const ExperimentConfig& cfg, Emitter& out) {
    const int m = effective_m(cfg);
    const auto p = bia::bcgm::SchemeParams::make(cfg.k, cfg.g, m);
    out.record(scheme_record(p));
    bool all_pass = true;
    for (int k = 1; k <= p.users; ++k) {
        const auto pattern = bia::bcgm::switching_pattern_full(k, p);
        const auto verdict =
            bia::bcgm::verify_alignment(pattern.first_phase, bia::desired_indices(k, p.groups), p);
        json j;
        j["record"] = "pattern";
        j["receiver"] = k;
        j["desired"] = bia::desired_indices(k, p.groups);
        j["first_phase"] = std::vector<int>(pattern.first_phase.begin(), pattern.first_phase.end());
        if (p.slots <= 4096) {
            j["modes"] = std::vector<int>(pattern.modes.begin(), pattern.modes.end());
        } else {
            j["modes_length"] = static_cast<long long>(pattern.modes.size());
        }
        j["verify"] = verdict.pass ? "pass" : "fail";
        if (!verdict.pass) j["violation"] = verdict.detail;
        all_pass = all_pass && verdict.pass;
        out.record(j);
    }
    return all_pass ? 0 : 1;
}

json receiver_record(const bia::sim::ReceiverReport& rx) {
    json j;
    j["record"] = "receiver_report";
    j["receiver"] = rx.receiver;
    json msgs = json::array();
    for (const auto& m : rx.messages) {
        json mj;
        mj["message"] = m.message;
        if (m.position > 0) mj["position"] = m.position;
        mj["max_rel_error"] = m.max_rel_error;
        if (m.conditioning_warning) mj["conditioning_warning"] = true;
        msgs.push_back(mj);
    }
    j["messages"] = msgs;
    if (!rx.family_ranks.empty()) {
        j["family_ranks"] = rx.family_ranks;
        j["union_rank"] = rx.union_rank;
        j["worst_decoder_residual"] = rx.worst_decoder_residual;
    }
    return j;
}

int cmd_simulate(const ExperimentConfig& cfg, Emitter& out) {
    const std::uint64_t seed = require_seed(cfg);
    const double sigma2 = sigma2_from(cfg);
    bia::sim::DecodingReport report;
    if (cfg.mode == "bcgm") {
        report = bia::sim::run_bcgm(cfg.k, cfg.g, effective_m(cfg), seed, sigma2, true);
    } else if (cfg.mode == "usi") {
        report = bia::sim::run_usi(cfg.k, cfg.g, cfg.m, seed, sigma2, true);
    } else {
        throw bia::parameter_error("simulate: --mode must be bcgm or usi (see mapreduce-demo)");
    }
    json hdr;
    hdr["record"] = "decoding_report";
    hdr["setting"] = report.setting;
    hdr["k"] = report.users;
    hdr["g"] = report.group_size;
    hdr["m"] = report.modes;
    hdr["m_effective"] = report.effective_modes;
    hdr["blocks"] = report.blocks;
    hdr["streams"] = report.streams;
    hdr["slots"] = report.slots;
    hdr["dof_message"] = report.dof_message;
    hdr["dof_sum"] = report.dof_sum;
    hdr["sigma2"] = report.sigma2;
    hdr["seed"] = report.seed;
    out.record(hdr);
    for (const auto& rx : report.receivers) out.record(receiver_record(rx));
    const bool pass = cfg.noiseless ? report.worst_rel_error < 1e-8 : true;
    json sum;
    sum["record"] = "summary";
    sum["worst_rel_error"] = report.worst_rel_error;
    if (cfg.noiseless) {
        sum["dimension_count"] = bia::metrics::dimension_count(report).str();
        sum["pass"] = pass;
    }
    out.record(sum);
    return pass ? 0 : 1;
}

int cmd_sweep(const ExperimentConfig& cfg, Emitter& out) {
    const std::uint64_t seed = require_seed(cfg);
    std::vector<double> grid = cfg.snr_db;
    if (grid.empty()) grid = {20.0, 30.0, 40.0, 50.0, 60.0};
    bia::metrics::RateSetting setting;
    if (cfg.mode == "bcgm") {
        setting = {bia::metrics::RateSetting::Kind::bcgm, cfg.k, cfg.g, effective_m(cfg)};
    } else if (cfg.mode == "usi") {
        setting = {bia::metrics::RateSetting::Kind::usi, cfg.k, cfg.g, cfg.m};
    } else if (cfg.mode == "mimo") {
        setting = {bia::metrics::RateSetting::Kind::mimo, 0, 0, cfg.m};
    } else {
        throw bia::parameter_error("sweep: --mode must be bcgm, usi or mimo");
    }
    const auto curve = bia::metrics::estimate_rate_curve(setting, grid, cfg.trials, seed);
    json j;
    j["record"] = "sweep_summary";
    j["mode"] = cfg.mode;
    j["trials"] = cfg.trials;
    j["seed"] = seed;
    j["slope"] = curve.slope;
    j["slope_ci_halfwidth"] = curve.slope_ci_halfwidth;
    j["formula_dof"] = curve.formula_dof.str();
    j["slope_over_formula"] = curve.slope / curve.formula_dof.value();
    out.record(j);
    // CSV after the summary record; --out receives both
    std::stringstream csv(bia::metrics::rate_curve_csv(curve));
    std::string line;
    while (std::getline(csv, line)) out.line(line);
    return 0;
}

int cmd_mapreduce_demo(const ExperimentConfig& cfg, Emitter& out) {
    bia::mr::JobSpec spec;
    if (!cfg.job_path.empty()) {
        std::ifstream in(cfg.job_path);
        if (!in) throw bia::parameter_error("cannot open job file: " + cfg.job_path);
        std::stringstream ss;
        ss << in.rdbuf();
        spec = bia::mr::parse_job_spec(ss.str());
    } else {
        spec.nodes = cfg.k;
        spec.load = cfg.r;
        spec.modes = cfg.m;
        spec.noiseless = cfg.noiseless || cfg.snr_db.empty();
        if (!cfg.snr_db.empty()) spec.snr_db = cfg.snr_db.front();
        spec.seed = require_seed(cfg);
        spec.payload_seed = spec.seed;
    }
    auto payloads = spec.payloads;
    if (payloads.empty()) {
        const int count = spec.payload_count > 0
                              ? spec.payload_count
                              : static_cast<int>(bia::binomial(spec.nodes, spec.load));
        payloads = bia::mr::synth_payloads(count, spec.payload_bytes, spec.payload_seed);
    }
    const auto job = bia::mr::build_job(spec.nodes, spec.load, payloads, spec.iva_bytes);
    const auto ivas = bia::mr::map_phase(job);
    bia::mr::ShuffleConfig shuffle_cfg;
    shuffle_cfg.modes = spec.modes;
    shuffle_cfg.seed = spec.seed;
    shuffle_cfg.sigma2 = spec.noiseless ? 0.0 : std::pow(10.0, -spec.snr_db / 10.0);
    const auto ledger = bia::mr::shuffle_phase(job, ivas, shuffle_cfg);
    out.line(bia::mr::ledger_to_json(ledger));
    const auto outputs = bia::mr::reduce_phase(job, ivas, ledger);
    const auto oracle = bia::mr::oracle_check(job, outputs);
    json j;
    j["record"] = "oracle";
    j["pass"] = oracle.pass;
    if (!oracle.pass) j["failed_nodes"] = oracle.failed_nodes;
    out.record(j);
    return oracle.pass ? 0 : 1;
}

int cmd_verify(const ExperimentConfig& cfg, Emitter& out) {
    const std::uint64_t seed = cfg.seed ? *cfg.seed
                                        : (std::getenv("BIA_SIM_SEED")
                                               ? std::strtoull(std::getenv("BIA_SIM_SEED"), nullptr, 10)
                                               : 1);
    const long long heavy_cap = cfg.deep ? bia::bcgm::kMaxSlots : 20'000;
    long long checks = 0, failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            json j;
            j["record"] = "verify_failure";
            j["what"] = what;
            out.record(j);
        }
    };

    for (int k = 2; k <= cfg.k_max; ++k) {
        for (int g = 1; g <= k; ++g) {
            for (int m = 1; m <= cfg.m_max; ++m) {
                // formula identities
                const auto bcgm_dof = bia::metrics::dof_bcgm(k, g, m);
                const auto usi_dof = bia::metrics::dof_usi(k, g, m);
                if (m <= g - 1)
                    check(usi_dof.achievable == bia::Rational(g, 1) * bcgm_dof,
                          "usi = G * bcgm at K=" + std::to_string(k) + " G=" + std::to_string(g) +
                              " M=" + std::to_string(m));
                if (g >= 2) {
                    const auto mr_dof = bia::metrics::dof_mapreduce(k, g - 1, m);
                    check(mr_dof.achievable == usi_dof.achievable && mr_dof.upper == usi_dof.upper,
                          "mapreduce = usi at K=" + std::to_string(k) + " r=" + std::to_string(g - 1) +
                              " M=" + std::to_string(m));
                }

                bia::bcgm::SchemeParams p;
                try {
                    p = bia::bcgm::SchemeParams::make(k, g, m);
                } catch (const bia::size_error&) {
                    continue;  // beyond the construction guardrail
                }
                const auto dims = bia::bcgm::scheme_dimensions(p);
                check(dims.dof_sum == bcgm_dof, "dimension formula at K=" + std::to_string(k) +
                                                    " G=" + std::to_string(g) + " M=" + std::to_string(m));
                if (m >= 2) {
                    const auto lambda = bia::vandermonde_mds(p.per_rx_messages, p.num_messages);
                    const bia::bcgm::PrecoderGrid grid(p, lambda.base);
                    for (int rx = 1; rx <= k; ++rx) {
                        const auto pattern = bia::bcgm::switching_pattern_full(rx, p);
                        const auto verdict = bia::bcgm::verify_alignment(
                            pattern.first_phase, bia::desired_indices(rx, p.groups), p);
                        check(verdict.pass, "alignment at K=" + std::to_string(k) + " G=" +
                                                std::to_string(g) + " M=" + std::to_string(m) +
                                                " rx=" + std::to_string(rx));
                        if (p.slots > heavy_cap) continue;
                        long long total = 0;
                        for (int n = 1; n <= p.num_messages; ++n) {
                            const long long rank = bia::bcgm::structural_rank(pattern, n, grid);
                            total += rank;
                            const bool desired = p.groups.contains(n, rx);
                            check(rank == (desired ? p.streams : p.blocks),
                                  "rank E at K=" + std::to_string(k) + " G=" + std::to_string(g) +
                                      " M=" + std::to_string(m) + " rx=" + std::to_string(rx) +
                                      " n=" + std::to_string(n));
                        }
                        check(total == p.slots && bia::bcgm::union_structural_rank(pattern, grid) == p.slots,
                              "union rank at K=" + std::to_string(k) + " G=" + std::to_string(g) +
                                  " M=" + std::to_string(m) + " rx=" + std::to_string(rx));
                    }
                }
                if (p.slots <= heavy_cap) {
                    const auto report = bia::sim::run_bcgm(k, g, m, seed, 0.0, false);
                    check(report.worst_rel_error < 1e-8,
                          "noiseless bcgm recovery at K=" + std::to_string(k) + " G=" +
                              std::to_string(g) + " M=" + std::to_string(m));
                }
                if (g >= 2 && m <= g - 1) {
                    const auto report = bia::sim::run_usi(k, g, m, seed, 0.0, false);
                    check(report.worst_rel_error < 1e-8,
                          "noiseless usi recovery at K=" + std::to_string(k) + " G=" +
                              std::to_string(g) + " M=" + std::to_string(m));
                }
            }
        }
    }
    json j;
    j["record"] = "verify_summary";
    j["checks"] = checks;
    j["failures"] = failures;
    j["pass"] = failures == 0;
    out.record(j);
    return failures == 0 ? 0 : 1;
}

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const bia::parameter_error*>(&e)) return "parameter_error";
    if (dynamic_cast<const bia::membership_error*>(&e)) return "membership_error";
    if (dynamic_cast<const bia::size_error*>(&e)) return "size_error";
    if (dynamic_cast<const bia::encoding_error*>(&e)) return "encoding_error";
    if (dynamic_cast<const bia::decoding_error*>(&e)) return "decoding_error";
    return "error";
}

void add_common(CLI::App* sub, ExperimentConfig& cfg) {
    sub->add_option("--mode", cfg.mode, "setting: bcgm | usi | mapreduce | mimo");
    sub->add_option("--k", cfg.k, "node / receiver count K");
    sub->add_option("--g", cfg.g, "groupcast size G");
    sub->add_option("--r", cfg.r, "computation load r");
    sub->add_option("--m", cfg.m, "antenna / mode count M");
    sub->add_option("--m-tx", cfg.m_tx, "transmit antenna count (asymmetric)");
    sub->add_option("--m-rx", cfg.m_rx, "receiver mode count (asymmetric)");
    sub->add_option("--snr-db", cfg.snr_db, "SNR grid point in dB (repeatable)");
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials");
    sub->add_option("--seed", cfg.seed, "random seed (BIA_SIM_SEED as fallback)");
    sub->add_flag("--noiseless", cfg.noiseless, "disable AWGN");
    sub->add_option("--out", cfg.out, "duplicate output into this file");
    sub->add_option("--config", cfg.config_path, "JSON config file (overrides flags)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blind interference alignment scheme simulator"};
    app.require_subcommand(1);
    ExperimentConfig cfg;

    CLI::App* dims = app.add_subcommand("dims", "scheme dimensions and DoF formulas");
    add_common(dims, cfg);
    CLI::App* pattern = app.add_subcommand("pattern", "switching patterns and alignment verdicts");
    add_common(pattern, cfg);
    CLI::App* simulate = app.add_subcommand("simulate", "end-to-end decoding run");
    add_common(simulate, cfg);
    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo rate curve and DoF slope");
    add_common(sweep, cfg);
    CLI::App* demo = app.add_subcommand("mapreduce-demo", "map/shuffle/reduce round trip");
    add_common(demo, cfg);
    demo->add_option("--job", cfg.job_path, "job description file (JSON)");
    CLI::App* verify = app.add_subcommand("verify", "invariant suite over a parameter grid");
    add_common(verify, cfg);
    verify->add_option("--k-max", cfg.k_max, "largest K in the grid");
    verify->add_option("--m-max", cfg.m_max, "largest M in the grid");
    verify->add_flag("--deep", cfg.deep, "include the largest in-guardrail schemes");

    CLI11_PARSE(app, argc, argv);

    try {
        overlay_config_file(cfg);
        Emitter out(cfg.out);
        if (dims->parsed()) return cmd_dims(cfg, out);
        if (pattern->parsed()) return cmd_pattern(cfg, out);
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (sweep->parsed()) return cmd_sweep(cfg, out);
        if (demo->parsed()) return cmd_mapreduce_demo(cfg, out);
        if (verify->parsed()) return cmd_verify(cfg, out);
    } catch (const bia::alignment_error& e) {
        json j;
        j["record"] = "error";
        j["type"] = "alignment_error";
        j["what"] = e.what();
        if (!e.family_ranks.empty()) j["family_ranks"] = e.family_ranks;
        if (e.union_rank >= 0) j["union_rank"] = e.union_rank;
        if (e.expected_total >= 0) j["expected_total"] = e.expected_total;
        std::cout << j.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json j;
        j["record"] = "error";
        j["type"] = error_type(e);
        j["what"] = e.what();
        std::cout << j.dump() << "\n";
        return 2;
    }
    return 2;
}
