#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "isle/explorer.hpp"

using namespace isle;
using Catch::Approx;

namespace {

constexpr double kTcProbe = 2.11e-10;        // inverter chain, one parameter
constexpr double kLossProbe = 0.15208412077144325; // closed-form loss at kTcProbe

CircuitEvaluator inv_chain_one_par() {
    const GateLibrary lib = default_gate_library();
    return CircuitEvaluator(Surrogate{}, lib, inverter_chain(lib),
                            make_parameter_set(SetTag::OnePar));
}

ExplorerConfig probe_config(double t_c, SleMode mode) {
    ExplorerConfig cfg;
    cfg.t_c = t_c;
    cfg.mode = mode;
    return cfg;
}

} // namespace

TEST_CASE("explorer sizes the sample set from capacity over expected loss") {
    const CircuitEvaluator eval = inv_chain_one_par();
    ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d2);
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{100, 1});
    REQUIRE(res.n_samples == 1000); // ceil(200 / 0.2)

    cfg.mc_sim_capacity = 50;
    const IsleResult small = isle_explorer(eval, cfg, RandomSource{100, 1});
    REQUIRE(small.n_samples == 250);
}

TEST_CASE("margin grid is index-based and crosses zero exactly") {
    const CircuitEvaluator eval = inv_chain_one_par();
    const ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d2);
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{100, 2});

    REQUIRE(res.trace.size() >= 11);
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
        REQUIRE(res.trace[k].pass_index == static_cast<int>(k));
        REQUIRE(res.trace[k].eps ==
                -10.0 * cfg.eps_step + static_cast<double>(k) * cfg.eps_step);
    }
    REQUIRE(res.trace[10].eps == 0.0);
}

TEST_CASE("explorer result is internally consistent") {
    const CircuitEvaluator eval = inv_chain_one_par();
    const ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d2);
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{100, 3});

    REQUIRE(static_cast<long>(res.kept_fails.size()) == res.kept_at_eps_min);
    long fails = 0;
    for (char f : res.kept_fails) fails += f;
    REQUIRE(fails == res.loss_points_at_eps_min);
    REQUIRE(res.loss ==
            Approx(res.loss_le_eps_min * static_cast<double>(res.loss_points_at_eps_min) /
                   static_cast<double>(res.kept_at_eps_min))
                .epsilon(1e-15));
    REQUIRE(res.n_full_sims >= res.kept_at_eps_min);
    REQUIRE(res.safety_violations == 0);

    // snapshots happen exactly on passes that discovered failing whites
    double last_fail_eps = -1.0;
    for (const PassTrace& tr : res.trace) {
        REQUIRE(tr.snapshot == (tr.new_loss_points > 0));
        if (!tr.snapshot) REQUIRE_FALSE(tr.snapshot_beyond_literal);
        if (tr.new_loss_points > 0) last_fail_eps = tr.eps;
    }
    REQUIRE(res.eps_min == last_fail_eps);
}

TEST_CASE("explorer reproduces the closed-form loss") {
    const CircuitEvaluator eval = inv_chain_one_par();

    for (SleMode mode : {SleMode::d1, SleMode::d2}) {
        const ExplorerConfig cfg = probe_config(kTcProbe, mode);
        const IsleResult res = isle_explorer(eval, cfg, RandomSource{2026, 4});
        REQUIRE(std::fabs(res.loss - kLossProbe) < 0.015);
        REQUIRE(res.safety_violations == 0);
    }
}

TEST_CASE("exact effort model drives the margin to zero or below") {
    const GateLibrary lib = default_gate_library(0.0);
    const CircuitEvaluator eval(Surrogate{}, lib, gate_chain(lib),
                                make_parameter_set(SetTag::ThrPar));
    ExplorerConfig cfg = probe_config(3.05e-10, SleMode::d2);
    cfg.mc_sim_capacity = 50;
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{11, 5});

    REQUIRE(res.eps_min <= 0.0);
    REQUIRE(res.safety_violations == 0);
    REQUIRE(res.loss > 0.0);
}

TEST_CASE("runs without failures report zero loss") {
    const GateLibrary lib = default_gate_library();
    const CircuitEvaluator eval(Surrogate{}, lib, gate_chain(lib),
                                make_parameter_set(SetTag::ThrPar));
    ExplorerConfig cfg = probe_config(4.0e-10, SleMode::d2);
    cfg.mc_sim_capacity = 50;
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{8, 6});

    REQUIRE(res.loss == 0.0);
    REQUIRE(res.kept_at_eps_min == 0);
    REQUIRE(res.loss_points_at_eps_min == 0);
    REQUIRE(res.kept_fails.empty());
    REQUIRE(res.safety_violations == 0);
    double first_white_eps = 0.0;
    bool seen = false;
    for (const PassTrace& tr : res.trace) {
        if (tr.new_whites > 0) {
            first_white_eps = tr.eps;
            seen = true;
            break;
        }
    }
    REQUIRE(seen);
    REQUIRE(res.eps_min == first_white_eps);
}

TEST_CASE("explorer stops on the safety margin or the eps ceiling") {
    const CircuitEvaluator eval = inv_chain_one_par();
    const ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d2);
    const IsleResult res = isle_explorer(eval, cfg, RandomSource{100, 7});
    REQUIRE_FALSE(res.trace.empty());
    const PassTrace& last = res.trace.back();
    const bool margin_exit = last.points_in_margin > cfg.safety_limit;
    const bool ceiling_exit = last.eps + cfg.eps_step > cfg.t_c;
    REQUIRE((margin_exit || ceiling_exit));
}

TEST_CASE("safety verification flags failing points outside the kept region") {
    const CircuitEvaluator eval = inv_chain_one_par();
    ExplorerState st;
    SamplePoint good;
    good.color = PointColor::white;
    good.full_fail = true;
    good.sle_delay = 1.1e-10;
    SamplePoint missed = good;
    missed.sle_delay = 0.9e-10; // below t_c - eps_min: the biased density skips it
    SamplePoint clean = good;
    clean.full_fail = false;
    clean.sle_delay = 0.5e-10;
    st.points = {good, missed, clean};

    REQUIRE(verify_safety(st, 1.0e-10, 0.0) == 1);
    REQUIRE(verify_safety(st, 0.8e-10, 0.0) == 0);
}

TEST_CASE("explorer rejects malformed configurations") {
    const CircuitEvaluator eval = inv_chain_one_par();
    ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d2);
    cfg.mc_sim_capacity = 0;
    REQUIRE_THROWS_AS(isle_explorer(eval, cfg, RandomSource{1, 1}), std::invalid_argument);
    cfg = probe_config(kTcProbe, SleMode::d2);
    cfg.expected_max_loss = 0.0;
    REQUIRE_THROWS_AS(isle_explorer(eval, cfg, RandomSource{1, 1}), std::invalid_argument);
    cfg = probe_config(kTcProbe, SleMode::d2);
    cfg.eps_step = 0.0;
    REQUIRE_THROWS_AS(isle_explorer(eval, cfg, RandomSource{1, 1}), std::invalid_argument);
}

TEST_CASE("explorer is deterministic in the random source") {
    const CircuitEvaluator eval = inv_chain_one_par();
    const ExplorerConfig cfg = probe_config(kTcProbe, SleMode::d1);
    const IsleResult a = isle_explorer(eval, cfg, RandomSource{31, 9});
    const IsleResult b = isle_explorer(eval, cfg, RandomSource{31, 9});
    REQUIRE(a.loss == b.loss);
    REQUIRE(a.eps_min == b.eps_min);
    REQUIRE(a.n_full_sims == b.n_full_sims);
    REQUIRE(a.trace.size() == b.trace.size());

    const IsleResult c = isle_explorer(eval, cfg, RandomSource{31, 10});
    REQUIRE(c.loss != a.loss); // different stream, different points
}
