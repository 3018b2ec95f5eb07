#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "isle/circuit.hpp"
#include "isle/estimators.hpp"
#include "isle/param_space.hpp"
#include "isle/rng.hpp"

namespace isle {

enum class PointColor : std::uint8_t { black, white };

struct SamplePoint {
    ParameterVector x;
    double sle_delay = 0.0; // cached once; does not depend on the margin
    PointColor color = PointColor::black;
    bool full_fail = false; // valid only for white points
};

struct PassTrace {
    int pass_index = 0;
    double eps = 0.0;
    long new_whites = 0;
    long new_loss_points = 0;
    long points_in_margin = 0;
    bool snapshot = false;
    bool snapshot_beyond_literal = false;
};

struct ExplorerConfig {
    long mc_sim_capacity = 200;
    double expected_max_loss = 0.2;
    double t_c = 0.0;
    long safety_limit = 20;
    double eps_step = 0.02e-12;                       // seconds
    double eps_init = std::numeric_limits<double>::quiet_NaN();    // default -10 * eps_step
    double eps_ceiling = std::numeric_limits<double>::quiet_NaN(); // default t_c
    SleMode mode = SleMode::d2;
    long fallback_sle_samples = 50000; // used when no external Loss_le source is given
};

// points_in_margin counts consecutive non-failing whites since the last
// failing white.
struct ExplorerState {
    std::vector<SamplePoint> points;
    long points_in_margin = 0;
    long mc_loss_count = 0;
    long white_points = 0;
    long full_sims = 0;
};

struct PassResult {
    long new_whites = 0;
    long new_fails = 0;
};

struct IsleResult {
    double loss = 0.0;
    double eps_min = 0.0;
    double eps_end = 0.0;
    long n_samples = 0;
    long n_full_sims = 0;
    long kept_at_eps_min = 0;        // whites at the recorded margin
    long loss_points_at_eps_min = 0; // failing whites at the recorded margin
    double loss_le_eps_min = 0.0;
    long safety_violations = 0;
    long snapshots_beyond_literal = 0;
    std::vector<char> kept_fails; // fail flag per kept point, draw order
    std::vector<PassTrace> trace;
};

// One sweep over the still-black points in ascending index order at margin
// eps: whiten those the effort model flags at t_c - eps, run one full
// simulation on each, and update the margin counter.
inline PassResult explore_pass(ExplorerState& st, const CircuitEvaluator& eval, double t_c,
                               double eps) {
    const double t_eps = t_c - eps;
    PassResult r;
    for (SamplePoint& pt : st.points) {
        if (pt.color != PointColor::black) continue;
        if (!indicator_sle(pt.sle_delay, t_eps)) continue;
        pt.color = PointColor::white;
        ++st.white_points;
        ++r.new_whites;
        pt.full_fail = eval.fails_full(pt.x, t_c);
        ++st.full_sims;
        if (pt.full_fail) {
            ++st.mc_loss_count;
            ++r.new_fails;
            st.points_in_margin = 0;
        } else {
            ++st.points_in_margin;
        }
    }
    return r;
}

// Failing whites the effort model misses at margin eps_min. Any nonzero
// count means the biased density would exclude part of the failure region.
inline long verify_safety(const ExplorerState& st, double t_c, double eps_min) {
    const double t_eps = t_c - eps_min;
    long violations = 0;
    for (const SamplePoint& pt : st.points) {
        if (pt.color == PointColor::white && pt.full_fail && !indicator_sle(pt.sle_delay, t_eps)) {
            ++violations;
        }
    }
    return violations;
}

using LossLeFn = std::function<double(double t_eps)>;

// Margin determination: grow eps on a fixed grid until safety_limit
// consecutive non-failing whites accumulate, snapshotting eps_min and the
// white/loss counts after every pass that discovered a failing white. The
// literal snapshot rule (margin == 0 after a pass with new whites) misses a
// failing white followed in-pass by a non-failing one; such extra snapshots
// are flagged in the trace.
inline IsleResult isle_explorer(const CircuitEvaluator& eval, const ExplorerConfig& cfg,
                                const RandomSource& src, const LossLeFn& loss_le_source = {},
                                DrawAudit* audit = nullptr) {
    if (!(cfg.expected_max_loss > 0.0 && cfg.expected_max_loss <= 1.0)) {
        throw std::invalid_argument("isle_explorer: expected_max_loss must lie in (0,1]");
    }
    if (cfg.mc_sim_capacity <= 0 || !(cfg.eps_step > 0.0) || cfg.safety_limit < 0) {
        throw std::invalid_argument("isle_explorer: bad capacity, eps_step, or safety_limit");
    }

    const double eps_init = std::isnan(cfg.eps_init) ? -10.0 * cfg.eps_step : cfg.eps_init;
    const double eps_ceiling = std::isnan(cfg.eps_ceiling) ? cfg.t_c : cfg.eps_ceiling;
    const long num_f = static_cast<long>(
        std::ceil(static_cast<double>(cfg.mc_sim_capacity) / cfg.expected_max_loss));

    ExplorerState st;
    st.points.resize(static_cast<std::size_t>(num_f));
    for (long i = 0; i < num_f; ++i) {
        SamplePoint& pt = st.points[static_cast<std::size_t>(i)];
        pt.x = draw_at(eval.parameter_set(), src, static_cast<std::uint64_t>(i), audit);
        pt.sle_delay = eval.sle_delay(pt.x, cfg.mode);
    }

    IsleResult res;
    res.n_samples = num_f;
    bool have_snapshot = false;
    int pass_index = 0;

    while (st.points_in_margin <= cfg.safety_limit) {
        // Index-based grid: eps_init + k*eps_step, so the default grid hits
        // 0 exactly after ten steps.
        const double eps = eps_init + static_cast<double>(pass_index) * cfg.eps_step;
        if (eps > eps_ceiling) break;
        const PassResult pr = explore_pass(st, eval, cfg.t_c, eps);

        PassTrace tr;
        tr.pass_index = pass_index;
        tr.eps = eps;
        tr.new_whites = pr.new_whites;
        tr.new_loss_points = pr.new_fails;
        tr.points_in_margin = st.points_in_margin;
        if (pr.new_fails > 0) {
            tr.snapshot = true;
            tr.snapshot_beyond_literal = !(st.points_in_margin == 0 && pr.new_whites > 0);
            if (tr.snapshot_beyond_literal) ++res.snapshots_beyond_literal;
            res.eps_min = eps;
            res.loss_points_at_eps_min = st.mc_loss_count;
            res.kept_at_eps_min = st.white_points;
            have_snapshot = true;
        }
        res.trace.push_back(tr);
        res.eps_end = eps;
        ++pass_index;
    }

    if (st.white_points == 0) {
        throw std::runtime_error("isle_explorer: no white point discovered below the eps ceiling");
    }

    res.n_full_sims = st.full_sims;
    if (!have_snapshot) {
        // No failing sample at all: the loss estimate is zero and any margin
        // covers the (empty) failure set. Record the first white's grid eps.
        for (const PassTrace& tr : res.trace) {
            if (tr.new_whites > 0) {
                res.eps_min = tr.eps;
                break;
            }
        }
        res.kept_at_eps_min = 0;
        res.loss_points_at_eps_min = 0;
    }

    const double t_eps_min = cfg.t_c - res.eps_min;
    if (have_snapshot) {
        // Kept set at the recorded margin, in draw order: exactly the whites
        // whitened at margins <= eps_min.
        for (const SamplePoint& pt : st.points) {
            if (pt.sle_delay > t_eps_min) {
                res.kept_fails.push_back(pt.full_fail ? 1 : 0);
            }
        }
    }

    double loss_le = 0.0;
    if (loss_le_source) {
        loss_le = loss_le_source(t_eps_min);
    } else {
        const RandomSource pool_src = src.with_stream(src.stream ^ 0x5E5E5E5E5E5E5E5Eull);
        long fails = 0;
        for (long i = 0; i < cfg.fallback_sle_samples; ++i) {
            const ParameterVector x =
                draw_at(eval.parameter_set(), pool_src, static_cast<std::uint64_t>(i));
            if (eval.fails_sle(x, t_eps_min, cfg.mode)) ++fails;
        }
        loss_le = static_cast<double>(fails) / static_cast<double>(cfg.fallback_sle_samples);
    }
    res.loss_le_eps_min = loss_le;

    res.loss = (res.kept_at_eps_min > 0)
                   ? loss_le * static_cast<double>(res.loss_points_at_eps_min) /
                         static_cast<double>(res.kept_at_eps_min)
                   : 0.0;
    res.safety_violations = verify_safety(st, cfg.t_c, res.eps_min);
    return res;
}

} // namespace isle
