#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "isle/analysis.hpp"
#include "isle/circuit.hpp"
#include "isle/config.hpp"
#include "isle/estimators.hpp"
#include "isle/explorer.hpp"
#include "isle/param_space.hpp"
#include "isle/rng.hpp"
#include "isle/version.hpp"

namespace isle {

// Fixed stream ids; repetition streams are base + repetition index.
namespace stream_id {
inline constexpr std::uint64_t calibrate = 1;
inline constexpr std::uint64_t ground_truth = 2;
inline constexpr std::uint64_t pool = 3;
inline constexpr std::uint64_t scatter = 4;
inline constexpr std::uint64_t std_base = 0x10000;
inline constexpr std::uint64_t d1_base = 0x20000;
inline constexpr std::uint64_t d2_base = 0x30000;
} // namespace stream_id

inline CircuitEvaluator build_evaluator(const ExperimentConfig& cfg) {
    const GateLibrary lib = library_from_config(cfg);
    const Surrogate sur{cfg.surrogate, cfg.nominals};
    const ParameterSet set = parameter_set_from_config(cfg);
    const CircuitModel circ = circuit_from_config(cfg, lib);
    return CircuitEvaluator(sur, lib, circ, set);
}

// Empirical quantile calibration: t_c is the order statistic at rank
// ceil((1 - target_loss) * n), so a fresh run fails with probability close
// to target_loss. For target 0.5 and even n this is the lower median.
inline double calibrate_tc(const CircuitEvaluator& eval, long n_cal, double target_loss,
                           const RandomSource& src, DrawAudit* audit = nullptr) {
    if (n_cal < 10000) {
        throw std::invalid_argument("calibrate_tc: need at least 10000 calibration samples");
    }
    if (!(target_loss > 0.0 && target_loss < 1.0)) {
        throw std::domain_error("calibrate_tc: target_loss must lie in (0,1)");
    }
    std::vector<double> delays(static_cast<std::size_t>(n_cal));
    for (long i = 0; i < n_cal; ++i) {
        delays[static_cast<std::size_t>(i)] =
            eval.full_delay(draw_at(eval.parameter_set(), src, static_cast<std::uint64_t>(i), audit));
    }
    long rank = static_cast<long>(std::ceil((1.0 - target_loss) * static_cast<double>(n_cal)));
    rank = std::clamp(rank, 1L, n_cal);
    auto nth = delays.begin() + (rank - 1);
    std::nth_element(delays.begin(), nth, delays.end());
    return *nth;
}

struct IsleRunRecord {
    double loss = 0.0;
    long n_samples = 0;
    long n_full_sims = 0;
    double eps_min = 0.0;
    double eps_end = 0.0;
    long kept = 0;
    long loss_points = 0;
    double loss_le_eps_min = 0.0;
    long safety_violations = 0;
    long snapshots_beyond_literal = 0;
    std::string kept_fail_bits; // failing-kept flags in draw order
};

struct RunRecord {
    int rep = 0;
    double std_loss = 0.0;
    long std_n = 0;
    std::string std_bits; // full-oracle indicator per sample, draw order
    std::optional<IsleRunRecord> d1;
    std::optional<IsleRunRecord> d2;
};

struct LaneSummary {
    double mean_loss = 0.0;
    double loss_error = 0.0;
    double mean_sims = 0.0;
    // isle lanes only; infinities mark degenerate (near-exact) biasing
    double gain_theoretical = std::numeric_limits<double>::quiet_NaN();
    double gain_empirical = std::numeric_limits<double>::quiet_NaN();
    double mean_eps_min = 0.0;
    double mean_loss_le = 0.0;
    double mean_kept = 0.0;
};

struct GroundTruth {
    long samples = 0;
    double loss = 0.0;
};

struct RunManifest {
    std::string tool_name = kToolName;
    std::string tool_version = kToolVersion;
    ExperimentConfig config; // snapshot; out_dir normalized away
    double t_c = 0.0;
    std::string t_c_source;
    std::optional<GroundTruth> ground_truth;
    DrawAudit audit;
    std::vector<RunRecord> runs;
    LaneSummary std_summary;
    std::optional<LaneSummary> d1_summary;
    std::optional<LaneSummary> d2_summary;
};

struct TraceRow {
    int rep = 0;
    SleMode mode = SleMode::d1;
    PassTrace pass;
};

struct ExperimentOutput {
    RunManifest manifest;
    std::vector<TraceRow> traces;
};

namespace experiment_detail {

inline std::string bits_to_string(const std::vector<char>& bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) s[i] = '1';
    }
    return s;
}

inline LaneSummary isle_lane_summary(const std::vector<IsleRunRecord>& recs, double std_error,
                                     long samples_per_run) {
    LaneSummary lane;
    std::vector<double> losses, sims, eps_mins, loss_les, kepts;
    for (const IsleRunRecord& r : recs) {
        losses.push_back(r.loss);
        sims.push_back(static_cast<double>(r.n_full_sims));
        eps_mins.push_back(r.eps_min);
        loss_les.push_back(r.loss_le_eps_min);
        kepts.push_back(static_cast<double>(r.kept));
    }
    lane.mean_loss = mean_of(losses);
    lane.loss_error = empirical_error(losses);
    lane.mean_sims = mean_of(sims);
    lane.mean_eps_min = mean_of(eps_mins);
    lane.mean_loss_le = mean_of(loss_les);
    lane.mean_kept = mean_of(kepts);
    constexpr double inf = std::numeric_limits<double>::infinity();
    try {
        lane.gain_theoretical = theoretical_gain(lane.mean_loss, lane.mean_loss_le);
    } catch (const std::domain_error&) {
        lane.gain_theoretical = inf; // biasing indistinguishable from ideal
    }
    try {
        lane.gain_empirical = empirical_gain(static_cast<double>(samples_per_run), lane.mean_sims,
                                             std_error, lane.loss_error);
    } catch (const std::domain_error&) {
        lane.gain_empirical = inf; // zero spread across repetitions
    }
    return lane;
}

} // namespace experiment_detail

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    apply_seed_env(cfg);
    if (cfg.repetitions < 2 || cfg.samples_per_run < 1 || cfg.sle_mc_samples < 1) {
        throw std::invalid_argument("run_experiment: need >= 2 repetitions and >= 1 sample");
    }

    const CircuitEvaluator eval = build_evaluator(cfg);
    const ParameterSet& set = eval.parameter_set();
    const RandomSource base{cfg.seed, 0};

    ExperimentOutput out;
    RunManifest& man = out.manifest;
    man.config = cfg;
    man.config.out_dir.clear(); // keep manifests identical across output locations

    DrawAudit audit;

    if (cfg.t_c > 0.0) {
        man.t_c = cfg.t_c;
        man.t_c_source = "config";
    } else {
        man.t_c = calibrate_tc(eval, cfg.calibration_samples, cfg.target_loss,
                               base.with_stream(stream_id::calibrate), &audit);
        man.t_c_source = "calibrated";
    }
    const double t_c = man.t_c;

    if (cfg.ground_truth_samples > 0) {
        const RandomSource src = base.with_stream(stream_id::ground_truth);
        long fails = 0;
        for (long i = 0; i < cfg.ground_truth_samples; ++i) {
            if (eval.fails_full(draw_at(set, src, static_cast<std::uint64_t>(i), &audit), t_c)) {
                ++fails;
            }
        }
        man.ground_truth = GroundTruth{cfg.ground_truth_samples,
                                       static_cast<double>(fails) /
                                           static_cast<double>(cfg.ground_truth_samples)};
    }

    // Shared normalizer pool: Loss_le at any margin is read off the sorted
    // effort-model delays of one dedicated sample set.
    const bool want_d1 = cfg.mode != RunMode::d2;
    const bool want_d2 = cfg.mode != RunMode::d1;
    std::vector<double> pool_d1, pool_d2;
    {
        const RandomSource src = base.with_stream(stream_id::pool);
        for (long i = 0; i < cfg.sle_mc_samples; ++i) {
            const ParameterVector x = draw_at(set, src, static_cast<std::uint64_t>(i), &audit);
            if (want_d1) pool_d1.push_back(eval.sle_delay(x, SleMode::d1));
            if (want_d2) pool_d2.push_back(eval.sle_delay(x, SleMode::d2));
        }
        std::sort(pool_d1.begin(), pool_d1.end());
        std::sort(pool_d2.begin(), pool_d2.end());
    }
    auto pool_loss_le = [](const std::vector<double>& sorted, double t_eps) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t_eps);
        return static_cast<double>(above) / static_cast<double>(sorted.size());
    };

    std::vector<double> std_losses;
    std::vector<IsleRunRecord> d1_recs, d2_recs;

    for (long rep = 0; rep < cfg.repetitions; ++rep) {
        RunRecord rec;
        rec.rep = static_cast<int>(rep);

        {
            const RandomSource src = base.with_stream(stream_id::std_base + static_cast<std::uint64_t>(rep));
            std::vector<char> bits;
            bits.reserve(static_cast<std::size_t>(cfg.samples_per_run));
            long fails = 0;
            for (long i = 0; i < cfg.samples_per_run; ++i) {
                const bool f =
                    eval.fails_full(draw_at(set, src, static_cast<std::uint64_t>(i), &audit), t_c);
                bits.push_back(f ? 1 : 0);
                if (f) ++fails;
            }
            rec.std_loss = static_cast<double>(fails) / static_cast<double>(cfg.samples_per_run);
            rec.std_n = cfg.samples_per_run;
            rec.std_bits = experiment_detail::bits_to_string(bits);
            std_losses.push_back(rec.std_loss);
        }

        auto run_isle = [&](SleMode mode) {
            ExplorerConfig ec;
            ec.mc_sim_capacity = cfg.mc_sim_capacity;
            ec.expected_max_loss = cfg.expected_max_loss;
            ec.t_c = t_c;
            ec.safety_limit = cfg.safety_limit;
            ec.eps_step = cfg.eps_step;
            ec.eps_init = cfg.eps_init;
            ec.eps_ceiling = cfg.eps_ceiling;
            ec.mode = mode;
            const std::uint64_t stream =
                (mode == SleMode::d1 ? stream_id::d1_base : stream_id::d2_base) +
                static_cast<std::uint64_t>(rep);
            const std::vector<double>& pool = (mode == SleMode::d1) ? pool_d1 : pool_d2;
            const IsleResult res =
                isle_explorer(eval, ec, base.with_stream(stream),
                              [&](double t_eps) { return pool_loss_le(pool, t_eps); }, &audit);
            if (res.safety_violations > 0) {
                throw std::runtime_error(
                    "run_experiment: safety violation in repetition " + std::to_string(rep) +
                    " (" + to_string(mode) + "): " + std::to_string(res.safety_violations) +
                    " failing point(s) outside the biased support");
            }
            IsleRunRecord r;
            r.loss = res.loss;
            r.n_samples = res.n_samples;
            r.n_full_sims = res.n_full_sims;
            r.eps_min = res.eps_min;
            r.eps_end = res.eps_end;
            r.kept = res.kept_at_eps_min;
            r.loss_points = res.loss_points_at_eps_min;
            r.loss_le_eps_min = res.loss_le_eps_min;
            r.safety_violations = res.safety_violations;
            r.snapshots_beyond_literal = res.snapshots_beyond_literal;
            r.kept_fail_bits = experiment_detail::bits_to_string(res.kept_fails);
            for (const PassTrace& tr : res.trace) {
                out.traces.push_back({static_cast<int>(rep), mode, tr});
            }
            return r;
        };

        if (want_d1) {
            rec.d1 = run_isle(SleMode::d1);
            d1_recs.push_back(*rec.d1);
        }
        if (want_d2) {
            rec.d2 = run_isle(SleMode::d2);
            d2_recs.push_back(*rec.d2);
        }
        man.runs.push_back(std::move(rec));
    }

    man.audit = audit;
    man.std_summary.mean_loss = mean_of(std_losses);
    man.std_summary.loss_error = empirical_error(std_losses);
    man.std_summary.mean_sims = static_cast<double>(cfg.samples_per_run);
    if (want_d1) {
        man.d1_summary = experiment_detail::isle_lane_summary(d1_recs, man.std_summary.loss_error,
                                                              cfg.samples_per_run);
    }
    if (want_d2) {
        man.d2_summary = experiment_detail::isle_lane_summary(d2_recs, man.std_summary.loss_error,
                                                              cfg.samples_per_run);
    }
    return out;
}

// Prefix estimates across repetitions, for error-vs-n curves. The ISLE lane
// uses each run's first n kept samples (runs with fewer are skipped).
inline std::vector<double> std_prefix_estimates(const RunManifest& man, long n) {
    std::vector<double> est;
    for (const RunRecord& rec : man.runs) {
        if (static_cast<long>(rec.std_bits.size()) < n) continue;
        long fails = 0;
        for (long i = 0; i < n; ++i) {
            if (rec.std_bits[static_cast<std::size_t>(i)] == '1') ++fails;
        }
        est.push_back(static_cast<double>(fails) / static_cast<double>(n));
    }
    return est;
}

inline std::vector<double> isle_prefix_estimates(const RunManifest& man, SleMode mode, long n) {
    std::vector<double> est;
    for (const RunRecord& rec : man.runs) {
        const std::optional<IsleRunRecord>& r = (mode == SleMode::d1) ? rec.d1 : rec.d2;
        if (!r || static_cast<long>(r->kept_fail_bits.size()) < n) continue;
        long fails = 0;
        for (long i = 0; i < n; ++i) {
            if (r->kept_fail_bits[static_cast<std::size_t>(i)] == '1') ++fails;
        }
        est.push_back(r->loss_le_eps_min * static_cast<double>(fails) / static_cast<double>(n));
    }
    return est;
}

// ---- serialization ----

namespace experiment_detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json finite_or_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

inline double number_or_special(const ordered_json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::runtime_error("manifest: bad numeric field '" + s + "'");
    }
    return j.get<double>();
}

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["circuit"] = cfg.circuit;
    j["params"] = to_string(cfg.params);
    j["mode"] = to_string(cfg.mode);
    j["repetitions"] = cfg.repetitions;
    j["samples_per_run"] = cfg.samples_per_run;
    j["sle_mc_samples"] = cfg.sle_mc_samples;
    j["target_loss"] = cfg.target_loss;
    j["t_c"] = cfg.t_c;
    j["calibration_samples"] = cfg.calibration_samples;
    j["ground_truth_samples"] = cfg.ground_truth_samples;
    j["scatter_samples"] = cfg.scatter_samples;
    j["seed"] = cfg.seed;
    j["chain_stages"] = cfg.chain_stages;
    j["stage_h"] = cfg.stage_h;
    j["mc_sim_capacity"] = cfg.mc_sim_capacity;
    j["expected_max_loss"] = cfg.expected_max_loss;
    j["safety_limit"] = cfg.safety_limit;
    j["eps_step"] = cfg.eps_step;
    j["eps_init"] = std::isnan(cfg.eps_init) ? ordered_json(nullptr) : ordered_json(cfg.eps_init);
    j["eps_ceiling"] =
        std::isnan(cfg.eps_ceiling) ? ordered_json(nullptr) : ordered_json(cfg.eps_ceiling);
    j["alpha"] = cfg.surrogate.alpha;
    j["k_time"] = cfg.surrogate.k_time;
    j["mu_leff"] = cfg.nominals.l_eff;
    j["mu_vdd"] = cfg.nominals.v_dd;
    j["mu_vth"] = cfg.nominals.v_th;
    j["ratio_leff"] = cfg.ratios.l_eff;
    j["ratio_vdd"] = cfg.ratios.v_dd;
    j["ratio_vth"] = cfg.ratios.v_th;
    j["gates"] = ordered_json::array();
    for (const GateKind& g : cfg.gates) {
        j["gates"].push_back({{"name", g.name}, {"c_g", g.c_g}, {"c_p", g.c_p}, {"c_x", g.c_x}});
    }
    j["circuits"] = ordered_json::array();
    for (const CircuitDecl& c : cfg.circuits) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["paths"] = ordered_json::array();
        for (const auto& [label, stages] : c.paths) {
            ordered_json jp;
            jp["label"] = label;
            jp["stages"] = ordered_json::array();
            for (const auto& [kind, h] : stages) {
                jp["stages"].push_back({{"kind", kind}, {"h", h}});
            }
            jc["paths"].push_back(jp);
        }
        j["circuits"].push_back(jc);
    }
    return j;
}

inline ExperimentConfig config_from_json(const ordered_json& j) {
    ExperimentConfig cfg;
    cfg.out_dir.clear(); // manifests never carry output locations
    cfg.circuit = j.at("circuit").get<std::string>();
    cfg.params = parse_set_tag(j.at("params").get<std::string>());
    cfg.mode = parse_run_mode(j.at("mode").get<std::string>());
    cfg.repetitions = j.at("repetitions").get<long>();
    cfg.samples_per_run = j.at("samples_per_run").get<long>();
    cfg.sle_mc_samples = j.at("sle_mc_samples").get<long>();
    cfg.target_loss = j.at("target_loss").get<double>();
    cfg.t_c = j.at("t_c").get<double>();
    cfg.calibration_samples = j.at("calibration_samples").get<long>();
    cfg.ground_truth_samples = j.at("ground_truth_samples").get<long>();
    cfg.scatter_samples = j.at("scatter_samples").get<long>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.chain_stages = j.at("chain_stages").get<int>();
    cfg.stage_h = j.at("stage_h").get<double>();
    cfg.mc_sim_capacity = j.at("mc_sim_capacity").get<long>();
    cfg.expected_max_loss = j.at("expected_max_loss").get<double>();
    cfg.safety_limit = j.at("safety_limit").get<long>();
    cfg.eps_step = j.at("eps_step").get<double>();
    cfg.eps_init = j.at("eps_init").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                              : j.at("eps_init").get<double>();
    cfg.eps_ceiling = j.at("eps_ceiling").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                    : j.at("eps_ceiling").get<double>();
    cfg.surrogate.alpha = j.at("alpha").get<double>();
    cfg.surrogate.k_time = j.at("k_time").get<double>();
    cfg.nominals.l_eff = j.at("mu_leff").get<double>();
    cfg.nominals.v_dd = j.at("mu_vdd").get<double>();
    cfg.nominals.v_th = j.at("mu_vth").get<double>();
    cfg.ratios.l_eff = j.at("ratio_leff").get<double>();
    cfg.ratios.v_dd = j.at("ratio_vdd").get<double>();
    cfg.ratios.v_th = j.at("ratio_vth").get<double>();
    for (const auto& g : j.at("gates")) {
        cfg.gates.push_back({g.at("name").get<std::string>(), g.at("c_g").get<double>(),
                             g.at("c_p").get<double>(), g.at("c_x").get<double>()});
    }
    for (const auto& jc : j.at("circuits")) {
        CircuitDecl c;
        c.name = jc.at("name").get<std::string>();
        for (const auto& jp : jc.at("paths")) {
            std::vector<std::pair<std::string, double>> stages;
            for (const auto& s : jp.at("stages")) {
                stages.emplace_back(s.at("kind").get<std::string>(), s.at("h").get<double>());
            }
            c.paths.emplace_back(jp.at("label").get<std::string>(), std::move(stages));
        }
        cfg.circuits.push_back(std::move(c));
    }
    return cfg;
}

inline ordered_json lane_to_json(const LaneSummary& s, bool isle_lane) {
    ordered_json j;
    j["mean_loss"] = s.mean_loss;
    j["loss_error"] = s.loss_error;
    j["mean_sims"] = s.mean_sims;
    if (isle_lane) {
        j["gain_theoretical"] = finite_or_string(s.gain_theoretical);
        j["gain_empirical"] = finite_or_string(s.gain_empirical);
        j["mean_eps_min"] = s.mean_eps_min;
        j["mean_loss_le"] = s.mean_loss_le;
        j["mean_kept"] = s.mean_kept;
    }
    return j;
}

inline LaneSummary lane_from_json(const ordered_json& j, bool isle_lane) {
    LaneSummary s;
    s.mean_loss = j.at("mean_loss").get<double>();
    s.loss_error = j.at("loss_error").get<double>();
    s.mean_sims = j.at("mean_sims").get<double>();
    if (isle_lane) {
        s.gain_theoretical = number_or_special(j.at("gain_theoretical"));
        s.gain_empirical = number_or_special(j.at("gain_empirical"));
        s.mean_eps_min = j.at("mean_eps_min").get<double>();
        s.mean_loss_le = j.at("mean_loss_le").get<double>();
        s.mean_kept = j.at("mean_kept").get<double>();
    }
    return s;
}

inline ordered_json isle_rec_to_json(const IsleRunRecord& r) {
    ordered_json j;
    j["loss"] = r.loss;
    j["n_samples"] = r.n_samples;
    j["n_full_sims"] = r.n_full_sims;
    j["eps_min"] = r.eps_min;
    j["eps_end"] = r.eps_end;
    j["kept"] = r.kept;
    j["loss_points"] = r.loss_points;
    j["loss_le_eps_min"] = r.loss_le_eps_min;
    j["safety_violations"] = r.safety_violations;
    j["snapshots_beyond_literal"] = r.snapshots_beyond_literal;
    j["kept_fail_bits"] = r.kept_fail_bits;
    return j;
}

inline IsleRunRecord isle_rec_from_json(const ordered_json& j) {
    IsleRunRecord r;
    r.loss = j.at("loss").get<double>();
    r.n_samples = j.at("n_samples").get<long>();
    r.n_full_sims = j.at("n_full_sims").get<long>();
    r.eps_min = j.at("eps_min").get<double>();
    r.eps_end = j.at("eps_end").get<double>();
    r.kept = j.at("kept").get<long>();
    r.loss_points = j.at("loss_points").get<long>();
    r.loss_le_eps_min = j.at("loss_le_eps_min").get<double>();
    r.safety_violations = j.at("safety_violations").get<long>();
    r.snapshots_beyond_literal = j.at("snapshots_beyond_literal").get<long>();
    r.kept_fail_bits = j.at("kept_fail_bits").get<std::string>();
    return r;
}

} // namespace experiment_detail

inline std::string manifest_to_json_text(const RunManifest& man) {
    using namespace experiment_detail;
    ordered_json j;
    j["tool"] = {{"name", man.tool_name}, {"version", man.tool_version}};
    j["seed"] = man.config.seed;
    j["seed_source"] = man.config.seed_source;
    j["config"] = config_to_json(man.config);
    j["t_c"] = man.t_c;
    j["t_c_source"] = man.t_c_source;
    if (man.ground_truth) {
        j["ground_truth"] = {{"samples", man.ground_truth->samples},
                             {"loss", man.ground_truth->loss}};
    } else {
        j["ground_truth"] = nullptr;
    }
    j["draw_audit"] = {{"beyond_6_sigma", man.audit.beyond_6_sigma},
                       {"max_abs_z", man.audit.max_abs_z}};
    j["runs"] = ordered_json::array();
    for (const RunRecord& rec : man.runs) {
        ordered_json jr;
        jr["rep"] = rec.rep;
        jr["std"] = {{"loss", rec.std_loss}, {"n_full_sims", rec.std_n}, {"bits", rec.std_bits}};
        jr["isle_d1"] = rec.d1 ? isle_rec_to_json(*rec.d1) : ordered_json(nullptr);
        jr["isle_d2"] = rec.d2 ? isle_rec_to_json(*rec.d2) : ordered_json(nullptr);
        j["runs"].push_back(std::move(jr));
    }
    j["summary"]["std_mc"] = lane_to_json(man.std_summary, false);
    j["summary"]["isle_d1"] =
        man.d1_summary ? lane_to_json(*man.d1_summary, true) : ordered_json(nullptr);
    j["summary"]["isle_d2"] =
        man.d2_summary ? lane_to_json(*man.d2_summary, true) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

inline RunManifest manifest_from_json_text(const std::string& text) {
    using namespace experiment_detail;
    const ordered_json j = ordered_json::parse(text);
    RunManifest man;
    man.tool_name = j.at("tool").at("name").get<std::string>();
    man.tool_version = j.at("tool").at("version").get<std::string>();
    man.config = config_from_json(j.at("config"));
    man.config.seed_source = j.at("seed_source").get<std::string>();
    man.t_c = j.at("t_c").get<double>();
    man.t_c_source = j.at("t_c_source").get<std::string>();
    if (!j.at("ground_truth").is_null()) {
        man.ground_truth = GroundTruth{j.at("ground_truth").at("samples").get<long>(),
                                       j.at("ground_truth").at("loss").get<double>()};
    }
    man.audit.beyond_6_sigma = j.at("draw_audit").at("beyond_6_sigma").get<long>();
    man.audit.max_abs_z = j.at("draw_audit").at("max_abs_z").get<double>();
    for (const auto& jr : j.at("runs")) {
        RunRecord rec;
        rec.rep = jr.at("rep").get<int>();
        rec.std_loss = jr.at("std").at("loss").get<double>();
        rec.std_n = jr.at("std").at("n_full_sims").get<long>();
        rec.std_bits = jr.at("std").at("bits").get<std::string>();
        if (!jr.at("isle_d1").is_null()) rec.d1 = isle_rec_from_json(jr.at("isle_d1"));
        if (!jr.at("isle_d2").is_null()) rec.d2 = isle_rec_from_json(jr.at("isle_d2"));
        man.runs.push_back(std::move(rec));
    }
    man.std_summary = lane_from_json(j.at("summary").at("std_mc"), false);
    if (!j.at("summary").at("isle_d1").is_null()) {
        man.d1_summary = lane_from_json(j.at("summary").at("isle_d1"), true);
    }
    if (!j.at("summary").at("isle_d2").is_null()) {
        man.d2_summary = lane_from_json(j.at("summary").at("isle_d2"), true);
    }
    return man;
}

// ---- report files ----

namespace experiment_detail {

inline std::string fmt_g(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << content;
}

} // namespace experiment_detail

inline void write_manifest(const RunManifest& man, const std::filesystem::path& dir) {
    experiment_detail::write_text_file(dir / "manifest.json", manifest_to_json_text(man));
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path.string() + "'");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json_text(text);
}

// Summary table in the benchmark layout: mean loss / loss error / number of
// circuit simulations per estimator, then the measured and predicted gains.
inline std::string summary_csv(const RunManifest& man) {
    using experiment_detail::fmt_g;
    std::string s =
        "circuit,params,t_c_seconds,"
        "mean_loss_sle_d1,mean_loss_sle_d2,mean_loss_std_mc,"
        "loss_error_sle_d1,loss_error_sle_d2,loss_error_std_mc,"
        "sims_sle_d1,sims_sle_d2,sims_std_mc,"
        "gain_empirical_d1,gain_empirical_d2,gain_theoretical_d1,gain_theoretical_d2\n";
    auto lane_field = [](const std::optional<LaneSummary>& lane, auto pick) {
        return lane ? experiment_detail::fmt_g(pick(*lane)) : std::string();
    };
    s += man.config.circuit + ',' + to_string(man.config.params) + ',' + fmt_g(man.t_c) + ',';
    s += lane_field(man.d1_summary, [](const LaneSummary& l) { return l.mean_loss; }) + ',';
    s += lane_field(man.d2_summary, [](const LaneSummary& l) { return l.mean_loss; }) + ',';
    s += fmt_g(man.std_summary.mean_loss) + ',';
    s += lane_field(man.d1_summary, [](const LaneSummary& l) { return l.loss_error; }) + ',';
    s += lane_field(man.d2_summary, [](const LaneSummary& l) { return l.loss_error; }) + ',';
    s += fmt_g(man.std_summary.loss_error) + ',';
    s += lane_field(man.d1_summary, [](const LaneSummary& l) { return l.mean_sims; }) + ',';
    s += lane_field(man.d2_summary, [](const LaneSummary& l) { return l.mean_sims; }) + ',';
    s += fmt_g(man.std_summary.mean_sims) + ',';
    s += lane_field(man.d1_summary, [](const LaneSummary& l) { return l.gain_empirical; }) + ',';
    s += lane_field(man.d2_summary, [](const LaneSummary& l) { return l.gain_empirical; }) + ',';
    s += lane_field(man.d1_summary, [](const LaneSummary& l) { return l.gain_theoretical; }) + ',';
    s += lane_field(man.d2_summary, [](const LaneSummary& l) { return l.gain_theoretical; }) + '\n';
    return s;
}

inline std::string loss_series_csv(const RunManifest& man) {
    using experiment_detail::fmt_g;
    std::string s = "rep,std_mc_loss,isle_d1_loss,isle_d2_loss\n";
    for (const RunRecord& rec : man.runs) {
        s += std::to_string(rec.rep) + ',' + fmt_g(rec.std_loss) + ',';
        s += (rec.d1 ? fmt_g(rec.d1->loss) : std::string()) + ',';
        s += (rec.d2 ? fmt_g(rec.d2->loss) : std::string()) + '\n';
    }
    return s;
}

inline std::string error_vs_n_csv(const RunManifest& man, long n_max = 500) {
    using experiment_detail::fmt_g;
    std::string s =
        "n,std_mc_error,std_mc_theory,isle_d1_error,isle_d1_theory,isle_d2_error,isle_d2_theory\n";
    auto isle_cols = [&](const std::optional<LaneSummary>& lane, SleMode mode, long n) {
        if (!lane) return std::string(",");
        std::string out;
        const std::vector<double> est = isle_prefix_estimates(man, mode, n);
        out += (est.size() >= 2 ? fmt_g(empirical_error(est)) : std::string()) + ',';
        if (lane->mean_loss_le > lane->mean_loss) {
            out += fmt_g(error_isle(lane->mean_loss, lane->mean_loss_le, n));
        }
        return out;
    };
    for (long n = 1; n <= n_max; ++n) {
        s += std::to_string(n) + ',';
        const std::vector<double> est = std_prefix_estimates(man, n);
        s += (est.size() >= 2 ? fmt_g(empirical_error(est)) : std::string()) + ',';
        s += fmt_g(error_mc(man.std_summary.mean_loss, n)) + ',';
        s += isle_cols(man.d1_summary, SleMode::d1, n) + ',';
        s += isle_cols(man.d2_summary, SleMode::d2, n) + '\n';
    }
    return s;
}

// Effort-model delay against the full oracle on a dedicated sample stream.
inline std::string scatter_csv(const RunManifest& man, SleMode mode) {
    using experiment_detail::fmt_g;
    const CircuitEvaluator eval = build_evaluator(man.config);
    const RandomSource src = RandomSource{man.config.seed, 0}.with_stream(stream_id::scatter);
    std::string s = "full_delay_seconds,sle_delay_seconds\n";
    for (long i = 0; i < man.config.scatter_samples; ++i) {
        const ParameterVector x =
            draw_at(eval.parameter_set(), src, static_cast<std::uint64_t>(i));
        s += fmt_g(eval.full_delay(x)) + ',' + fmt_g(eval.sle_delay(x, mode)) + '\n';
    }
    return s;
}

inline std::string trace_csv(const std::vector<TraceRow>& traces) {
    using experiment_detail::fmt_g;
    std::string s =
        "rep,mode,pass,eps_seconds,new_whites,new_loss_points,points_in_margin,snapshot,"
        "snapshot_beyond_literal\n";
    for (const TraceRow& t : traces) {
        s += std::to_string(t.rep) + ',';
        s += to_string(t.mode);
        s += ',' + std::to_string(t.pass.pass_index) + ',' + fmt_g(t.pass.eps) + ',';
        s += std::to_string(t.pass.new_whites) + ',' + std::to_string(t.pass.new_loss_points) +
             ',' + std::to_string(t.pass.points_in_margin) + ',';
        s += std::string(t.pass.snapshot ? "1" : "0") + ',' +
             (t.pass.snapshot_beyond_literal ? "1" : "0") + '\n';
    }
    return s;
}

inline void emit_reports(const RunManifest& man, const std::filesystem::path& dir) {
    using experiment_detail::write_text_file;
    write_text_file(dir / "summary.csv", summary_csv(man));
    write_text_file(dir / "loss_series.csv", loss_series_csv(man));
    write_text_file(dir / "error_vs_n.csv", error_vs_n_csv(man));
    if (man.d1_summary) write_text_file(dir / "scatter_d1.csv", scatter_csv(man, SleMode::d1));
    if (man.d2_summary) write_text_file(dir / "scatter_d2.csv", scatter_csv(man, SleMode::d2));
}

inline void write_outputs(const ExperimentOutput& out, const std::filesystem::path& dir) {
    write_manifest(out.manifest, dir);
    emit_reports(out.manifest, dir);
    experiment_detail::write_text_file(dir / "trace.csv", trace_csv(out.traces));
}

} // namespace isle
