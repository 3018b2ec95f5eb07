#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isle/experiment.hpp"

using namespace isle;
using Catch::Approx;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.circuit = "GateChain";
    cfg.params = SetTag::ThrPar;
    cfg.mode = RunMode::both;
    cfg.repetitions = 3;
    cfg.samples_per_run = 100;
    cfg.sle_mc_samples = 2000;
    cfg.t_c = 3.05e-10; // explicit: skips calibration
    cfg.ground_truth_samples = 0;
    cfg.scatter_samples = 40;
    cfg.mc_sim_capacity = 20;
    cfg.seed = 77;
    return cfg;
}

} // namespace

TEST_CASE("config text parses sections, overrides, and declared circuits") {
    std::istringstream ini(R"(# sample experiment
[experiment]
circuit = Custom
params = two
mode = d1
repetitions = 7
samples_per_run = 123
seed = 99
t_c = 2.5e-10

[explorer]
mc_sim_capacity = 80
eps_step = 0.04e-12
eps_init = auto

[surrogate]
alpha = 1.25

[parameters]
mu_vdd = 1.1
ratio_leff = 0.12

[gate.NAND2]
c_x = 0.01

[circuit.Custom]
main = NAND2:3 INV:2.5
side = INV:1
)");
    const ExperimentConfig cfg = parse_config_text(ini);

    REQUIRE(cfg.circuit == "Custom");
    REQUIRE(cfg.params == SetTag::TwoPar);
    REQUIRE(cfg.mode == RunMode::d1);
    REQUIRE(cfg.repetitions == 7);
    REQUIRE(cfg.samples_per_run == 123);
    REQUIRE(cfg.seed == 99);
    REQUIRE(cfg.seed_source == "config");
    REQUIRE(cfg.t_c == 2.5e-10);
    REQUIRE(cfg.mc_sim_capacity == 80);
    REQUIRE(cfg.eps_step == 0.04e-12);
    REQUIRE(std::isnan(cfg.eps_init));
    REQUIRE(cfg.surrogate.alpha == 1.25);
    REQUIRE(cfg.nominals.v_dd == 1.1);
    REQUIRE(cfg.ratios.l_eff == 0.12);

    // partial gate override keeps the builtin coefficients it did not touch
    REQUIRE(cfg.gates.size() == 1);
    REQUIRE(cfg.gates[0].name == "NAND2");
    REQUIRE(cfg.gates[0].c_x == 0.01);
    REQUIRE(cfg.gates[0].c_g == Approx(4.0 / 3.0).epsilon(1e-15));
    const GateLibrary lib = library_from_config(cfg);
    REQUIRE(lib.kinds.size() == 3);
    REQUIRE(lib.at(lib.index_of("NAND2")).c_x == 0.01);
    REQUIRE(lib.at(lib.index_of("INV")).c_x == 0.05);

    REQUIRE(cfg.circuits.size() == 1);
    const CircuitModel circ = circuit_from_config(cfg, lib);
    REQUIRE(circ.paths.size() == 2);
    REQUIRE(circ.paths[0].label == "main");
    REQUIRE(circ.paths[0].gates.size() == 2);
    REQUIRE(circ.paths[0].gates[1].h == 2.5);
}

TEST_CASE("config parser rejects unknown keys and malformed stages") {
    std::istringstream bad1("[experiment]\nrepetition = 7\n");
    REQUIRE_THROWS_AS(parse_config_text(bad1), std::invalid_argument);
    std::istringstream bad2("[circuit.C]\nmain = NAND2\n");
    REQUIRE_THROWS_AS(parse_config_text(bad2), std::invalid_argument);
    std::istringstream bad3("[gate.INV]\nc_g = 2.0\n");
    const ExperimentConfig cfg = parse_config_text(bad3);
    REQUIRE_THROWS_AS(library_from_config(cfg), std::invalid_argument);
}

TEST_CASE("environment seed outranks configured seeds") {
    ExperimentConfig cfg;
    cfg.seed = 5;
    cfg.seed_source = "config";
    unsetenv("ISLE_MASTER_SEED");
    apply_seed_env(cfg);
    REQUIRE(cfg.seed == 5);
    REQUIRE(cfg.seed_source == "config");

    setenv("ISLE_MASTER_SEED", "31337", 1);
    apply_seed_env(cfg);
    REQUIRE(cfg.seed == 31337);
    REQUIRE(cfg.seed_source == "env");

    setenv("ISLE_MASTER_SEED", "banana", 1);
    REQUIRE_THROWS_AS(apply_seed_env(cfg), std::invalid_argument);
    unsetenv("ISLE_MASTER_SEED");
}

TEST_CASE("calibration lands on the closed-form critical time") {
    ExperimentConfig cfg;
    cfg.circuit = "InverterChain";
    cfg.params = SetTag::OnePar;
    const CircuitEvaluator eval = build_evaluator(cfg);

    // loss 0.15 for the one-parameter inverter chain happens at this t_c
    const double t_c = calibrate_tc(eval, 20000, 0.15, RandomSource{404, 1});
    REQUIRE(std::fabs(t_c - 2.1109221258187636e-10) < 1e-12);

    REQUIRE_THROWS_AS(calibrate_tc(eval, 500, 0.15, RandomSource{404, 1}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(calibrate_tc(eval, 20000, 0.0, RandomSource{404, 1}), std::domain_error);
}

TEST_CASE("experiment runs are deterministic and round-trip through JSON") {
    const ExperimentConfig cfg = tiny_config();
    const ExperimentOutput a = run_experiment(cfg);
    const ExperimentOutput b = run_experiment(cfg);

    const std::string ja = manifest_to_json_text(a.manifest);
    const std::string jb = manifest_to_json_text(b.manifest);
    REQUIRE(ja == jb);

    const RunManifest loaded = manifest_from_json_text(ja);
    REQUIRE(manifest_to_json_text(loaded) == ja);

    REQUIRE(a.manifest.runs.size() == 3);
    REQUIRE(a.manifest.t_c == cfg.t_c);
    REQUIRE(a.manifest.t_c_source == "config");
    REQUIRE(a.manifest.config.out_dir.empty());
    REQUIRE(a.manifest.d1_summary.has_value());
    REQUIRE(a.manifest.d2_summary.has_value());
    REQUIRE_FALSE(a.manifest.ground_truth.has_value());
    for (const RunRecord& rec : a.manifest.runs) {
        REQUIRE(rec.std_bits.size() == 100);
        REQUIRE(rec.d1.has_value());
        REQUIRE(rec.d2.has_value());
        REQUIRE(rec.d1->safety_violations == 0);
        REQUIRE(rec.d2->safety_violations == 0);
    }
}

TEST_CASE("prefix estimates rebuild the per-run losses") {
    const ExperimentConfig cfg = tiny_config();
    const ExperimentOutput out = run_experiment(cfg);
    const RunManifest& man = out.manifest;

    const std::vector<double> full = std_prefix_estimates(man, cfg.samples_per_run);
    REQUIRE(full.size() == man.runs.size());
    for (std::size_t r = 0; r < full.size(); ++r) {
        REQUIRE(full[r] == Approx(man.runs[r].std_loss).epsilon(1e-15));
    }

    for (const RunRecord& rec : man.runs) {
        const long kept = rec.d2->kept;
        const std::vector<double> isle = isle_prefix_estimates(man, SleMode::d2, kept);
        REQUIRE_FALSE(isle.empty());
    }
}

TEST_CASE("report files are deterministic and complete") {
    namespace fs = std::filesystem;
    const fs::path dir1 = fs::temp_directory_path() / "isle_test_out1";
    const fs::path dir2 = fs::temp_directory_path() / "isle_test_out2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    const ExperimentConfig cfg = tiny_config();
    const ExperimentOutput out = run_experiment(cfg);
    write_outputs(out, dir1);
    write_outputs(out, dir2);

    const char* files[] = {"manifest.json", "summary.csv", "loss_series.csv",
                           "error_vs_n.csv", "scatter_d1.csv", "scatter_d2.csv", "trace.csv"};
    for (const char* f : files) {
        CAPTURE(f);
        REQUIRE(fs::exists(dir1 / f));
        std::ifstream in1(dir1 / f, std::ios::binary), in2(dir2 / f, std::ios::binary);
        std::stringstream s1, s2;
        s1 << in1.rdbuf();
        s2 << in2.rdbuf();
        REQUIRE(s1.str() == s2.str());
        REQUIRE_FALSE(s1.str().empty());
    }

    // a reload drives the report writer to identical bytes
    const RunManifest loaded = load_manifest(dir1 / "manifest.json");
    REQUIRE(summary_csv(loaded) == summary_csv(out.manifest));
    REQUIRE(error_vs_n_csv(loaded) == error_vs_n_csv(out.manifest));
    REQUIRE(scatter_csv(loaded, SleMode::d2) == scatter_csv(out.manifest, SleMode::d2));

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("experiment aborts when a run would violate safety") {
    // Not directly constructible from the benchmark circuits; covered by the
    // planted verify_safety cases. Here we only pin the validation path.
    ExperimentConfig cfg = tiny_config();
    cfg.repetitions = 1;
    REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = tiny_config();
    cfg.samples_per_run = 0;
    REQUIRE_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
