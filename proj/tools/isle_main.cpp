#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "isle/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string circuit;
    std::string params;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("-c,--config", a.config_path, "experiment config file (INI)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--circuit", a.circuit, "circuit name (InverterChain, GateChain, or declared)");
    cmd->add_option("--params", a.params, "varied parameter set")
        ->check(CLI::IsMember({"one", "two", "three"}));
    cmd->add_option("--seed", a.seed, "master seed")->each([&a](const std::string&) {
        a.seed_set = true;
    });
    cmd->add_option("-o,--out", a.out_dir, "output directory");
}

isle::ExperimentConfig resolve_config(const CommonArgs& a) {
    isle::ExperimentConfig cfg;
    if (!a.config_path.empty()) cfg = isle::parse_config_file(a.config_path);
    if (!a.circuit.empty()) cfg.circuit = a.circuit;
    if (!a.params.empty()) cfg.params = isle::parse_set_tag(a.params);
    if (!a.mode.empty()) cfg.mode = isle::parse_run_mode(a.mode);
    if (a.seed_set) {
        cfg.seed = a.seed;
        cfg.seed_source = "cli";
    }
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    isle::apply_seed_env(cfg);
    return cfg;
}

double resolve_tc(const isle::ExperimentConfig& cfg, const isle::CircuitEvaluator& eval) {
    if (cfg.t_c > 0.0) return cfg.t_c;
    return isle::calibrate_tc(eval, cfg.calibration_samples, cfg.target_loss,
                              isle::RandomSource{cfg.seed, isle::stream_id::calibrate});
}

int cmd_characterize(const CommonArgs& args) {
    const isle::ExperimentConfig cfg = resolve_config(args);
    const isle::CircuitEvaluator eval = isle::build_evaluator(cfg);
    const isle::ParameterSet& set = eval.parameter_set();
    const isle::OperatingPoint nom_op = isle::operating_point(set, isle::nominal_vector(set));
    const double tau = isle::characterize_tau(eval.surrogate(), nom_op);

    std::printf("circuit          %s\n", eval.circuit().name.c_str());
    std::printf("varied params   ");
    for (const isle::ParameterDef& d : set.defs) std::printf(" %s", d.name.c_str());
    std::printf("\n");
    std::printf("tau (nominal)    %.6g ps\n", tau * 1e12);
    const double nominal_delay = eval.full_delay(isle::nominal_vector(set));
    std::printf("nominal delay    %.6g ps\n\n", nominal_delay * 1e12);

    for (const isle::GateKind& kind : eval.library().kinds) {
        const int idx = eval.library().index_of(kind.name);
        const isle::GateCharacterization& c1 = eval.charset(isle::SleMode::d1).by_kind[idx];
        const isle::GateCharacterization& c2 = eval.charset(isle::SleMode::d2).by_kind[idx];
        std::printf("%-8s c_g=%.6g c_p=%.6g c_x=%.6g\n", kind.name.c_str(), kind.c_g, kind.c_p,
                    kind.c_x);
        std::printf("  d1: p=%.8g g=%.8g (frozen at nominal)\n", c1.p0, c1.g0);
        std::printf("  d2: p=%.8g g=%.8g", c2.p0, c2.g0);
        for (std::size_t j = 0; j < set.dim(); ++j) {
            std::printf("  d(p,g)/d%s=(%.4g, %.4g)", set.defs[j].name.c_str(), c2.dp[j],
                        c2.dg[j]);
        }
        std::printf("\n");
    }
    return 0;
}

int cmd_calibrate(const CommonArgs& args, long samples_override) {
    isle::ExperimentConfig cfg = resolve_config(args);
    if (samples_override > 0) cfg.calibration_samples = samples_override;
    const isle::CircuitEvaluator eval = isle::build_evaluator(cfg);
    const double t_c = isle::calibrate_tc(eval, cfg.calibration_samples, cfg.target_loss,
                                          isle::RandomSource{cfg.seed, isle::stream_id::calibrate});
    std::printf("circuit        %s (params=%s)\n", eval.circuit().name.c_str(),
                isle::to_string(cfg.params));
    std::printf("target loss    %.6g\n", cfg.target_loss);
    std::printf("samples        %ld\n", cfg.calibration_samples);
    std::printf("t_c            %.12g s  (%.6g ps)\n", t_c, t_c * 1e12);
    return 0;
}

int cmd_explore(const CommonArgs& args, long rep) {
    isle::ExperimentConfig cfg = resolve_config(args);
    if (cfg.mode == isle::RunMode::both) cfg.mode = isle::RunMode::d2;
    const isle::SleMode mode =
        (cfg.mode == isle::RunMode::d1) ? isle::SleMode::d1 : isle::SleMode::d2;
    const isle::CircuitEvaluator eval = isle::build_evaluator(cfg);
    const double t_c = resolve_tc(cfg, eval);

    isle::ExplorerConfig ec;
    ec.mc_sim_capacity = cfg.mc_sim_capacity;
    ec.expected_max_loss = cfg.expected_max_loss;
    ec.t_c = t_c;
    ec.safety_limit = cfg.safety_limit;
    ec.eps_step = cfg.eps_step;
    ec.eps_init = cfg.eps_init;
    ec.eps_ceiling = cfg.eps_ceiling;
    ec.mode = mode;
    ec.fallback_sle_samples = cfg.sle_mc_samples;
    const std::uint64_t stream =
        (mode == isle::SleMode::d1 ? isle::stream_id::d1_base : isle::stream_id::d2_base) +
        static_cast<std::uint64_t>(rep);
    const isle::IsleResult res =
        isle::isle_explorer(eval, ec, isle::RandomSource{cfg.seed, stream});

    std::printf("mode               %s\n", isle::to_string(mode));
    std::printf("t_c                %.12g s\n", t_c);
    std::printf("loss               %.6g\n", res.loss);
    std::printf("eps_min            %.6g ps\n", res.eps_min * 1e12);
    std::printf("eps_end            %.6g ps\n", res.eps_end * 1e12);
    std::printf("samples            %ld\n", res.n_samples);
    std::printf("full simulations   %ld\n", res.n_full_sims);
    std::printf("kept at eps_min    %ld (%ld failing)\n", res.kept_at_eps_min,
                res.loss_points_at_eps_min);
    std::printf("loss_le(eps_min)   %.6g\n", res.loss_le_eps_min);
    std::printf("safety violations  %ld\n", res.safety_violations);
    std::printf("\npass,eps_ps,new_whites,new_loss_points,points_in_margin,snapshot\n");
    for (const isle::PassTrace& tr : res.trace) {
        std::printf("%d,%.6g,%ld,%ld,%ld,%d\n", tr.pass_index, tr.eps * 1e12, tr.new_whites,
                    tr.new_loss_points, tr.points_in_margin, tr.snapshot ? 1 : 0);
    }
    return 0;
}

int cmd_run(const CommonArgs& args) {
    const isle::ExperimentConfig cfg = resolve_config(args);
    const isle::ExperimentOutput out = isle::run_experiment(cfg);
    isle::write_outputs(out, cfg.out_dir);
    std::printf("%s", isle::summary_csv(out.manifest).c_str());
    if (out.manifest.ground_truth) {
        std::printf("ground truth loss  %.6g  (%ld samples)\n", out.manifest.ground_truth->loss,
                    out.manifest.ground_truth->samples);
    }
    std::printf("wrote %s/{manifest.json,summary.csv,loss_series.csv,error_vs_n.csv,trace.csv",
                cfg.out_dir.c_str());
    if (out.manifest.d1_summary) std::printf(",scatter_d1.csv");
    if (out.manifest.d2_summary) std::printf(",scatter_d2.csv");
    std::printf("}\n");
    return 0;
}

int cmd_report(const std::string& manifest_arg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::path mpath(manifest_arg);
    if (fs::is_directory(mpath)) mpath /= "manifest.json";
    const isle::RunManifest man = isle::load_manifest(mpath);
    const fs::path dir = out_dir.empty() ? mpath.parent_path() : fs::path(out_dir);
    isle::emit_reports(man, dir);
    std::printf("wrote %s/{summary.csv,loss_series.csv,error_vs_n.csv", dir.string().c_str());
    if (man.d1_summary) std::printf(",scatter_d1.csv");
    if (man.d2_summary) std::printf(",scatter_d2.csv");
    std::printf("}\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"timing-yield estimation with effort-guided importance sampling"};
    app.set_version_flag("--version", std::string(isle::kToolName) + " " + isle::kToolVersion);
    app.require_subcommand(1);

    CommonArgs a_char, a_cal, a_exp, a_run;
    long cal_samples = 0;
    long exp_rep = 0;
    std::string rep_manifest, rep_out;

    CLI::App* c_char = app.add_subcommand("characterize", "print gate effort-model coefficients");
    add_common(c_char, a_char);

    CLI::App* c_cal = app.add_subcommand("calibrate", "pick t_c hitting the target loss");
    add_common(c_cal, a_cal);
    c_cal->add_option("--samples", cal_samples, "calibration sample count (min 10000)");

    CLI::App* c_exp = app.add_subcommand("explore", "single margin-determination run");
    add_common(c_exp, a_exp);
    c_exp->add_option("--mode", a_exp.mode, "effort model variant")
        ->check(CLI::IsMember({"d1", "d2"}));
    c_exp->add_option("--rep", exp_rep, "repetition index (selects the sample stream)");

    CLI::App* c_run = app.add_subcommand("run", "full experiment: repeated estimators + reports");
    add_common(c_run, a_run);
    c_run->add_option("--mode", a_run.mode, "estimator lane selection")
        ->check(CLI::IsMember({"d1", "d2", "both"}));

    CLI::App* c_rep = app.add_subcommand("report", "regenerate report files from a manifest");
    c_rep->add_option("manifest", rep_manifest, "manifest.json path or its directory")
        ->required();
    c_rep->add_option("-o,--out", rep_out, "output directory (default: manifest directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_char->parsed()) return cmd_characterize(a_char);
        if (c_cal->parsed()) return cmd_calibrate(a_cal, cal_samples);
        if (c_exp->parsed()) return cmd_explore(a_exp, exp_rep);
        if (c_run->parsed()) return cmd_run(a_run);
        if (c_rep->parsed()) return cmd_report(rep_manifest, rep_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
