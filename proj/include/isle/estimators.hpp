#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isle/circuit.hpp"
#include "isle/param_space.hpp"
#include "isle/rng.hpp"

namespace isle {

enum class EstimatorKind { std_mc, sle_mc, isle };

struct LossEstimate {
    double loss = 0.0;
    long n_samples = 0;
    long n_full_sims = 0;
    long n_sle_evals = 0;
    EstimatorKind kind = EstimatorKind::std_mc;
};

// Plain Monte Carlo over the full oracle.
inline LossEstimate std_mc_loss(const CircuitEvaluator& eval, double t_c,
                                std::span<const ParameterVector> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("std_mc_loss: no samples");
    }
    long fails = 0;
    for (const ParameterVector& x : samples) {
        if (eval.fails_full(x, t_c)) ++fails;
    }
    const long n = static_cast<long>(samples.size());
    return {static_cast<double>(fails) / static_cast<double>(n), n, n, 0, EstimatorKind::std_mc};
}

// Monte Carlo over the effort-model delay only; no full simulations.
inline LossEstimate sle_mc_loss(const CircuitEvaluator& eval, SleMode mode, double t_eps,
                                std::span<const ParameterVector> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("sle_mc_loss: no samples");
    }
    long fails = 0;
    for (const ParameterVector& x : samples) {
        if (eval.fails_sle(x, t_eps, mode)) ++fails;
    }
    const long n = static_cast<long>(samples.size());
    return {static_cast<double>(fails) / static_cast<double>(n), n, 0, n, EstimatorKind::sle_mc};
}

// Samples kept by rejection from the biased density
// f~(x) = I_le(t_eps, x) f(x) / Loss_le. The importance weight of every kept
// sample is the constant loss_le_eps.
struct BiasedSampleSet {
    std::vector<ParameterVector> kept;
    long n_proposed = 0;
    double t_eps = 0.0;
    double loss_le_eps = 0.0; // kept/proposed ratio unless overridden by a larger run
    SleMode mode = SleMode::d1;
};

// Rejection sampling from f~: propose from f, keep iff the effort-model
// indicator fires. Stops at kept_target or after proposal_budget proposals
// (default 100x the target).
inline BiasedSampleSet draw_biased(const CircuitEvaluator& eval, SleMode mode, double t_eps,
                                   long kept_target, const RandomSource& src,
                                   long proposal_budget = 0) {
    if (kept_target <= 0) {
        throw std::invalid_argument("draw_biased: kept_target must be positive");
    }
    if (proposal_budget <= 0) proposal_budget = 100 * kept_target;
    BiasedSampleSet out;
    out.t_eps = t_eps;
    out.mode = mode;
    out.kept.reserve(static_cast<std::size_t>(kept_target));
    while (out.n_proposed < proposal_budget &&
           static_cast<long>(out.kept.size()) < kept_target) {
        const ParameterVector x =
            draw_at(eval.parameter_set(), src, static_cast<std::uint64_t>(out.n_proposed));
        ++out.n_proposed;
        if (eval.fails_sle(x, t_eps, mode)) out.kept.push_back(x);
    }
    if (out.kept.empty()) {
        throw std::runtime_error("draw_biased: no sample accepted within the proposal budget");
    }
    out.loss_le_eps = static_cast<double>(out.kept.size()) / static_cast<double>(out.n_proposed);
    return out;
}

// Importance-sampled loss: loss_le_eps * (failing kept fraction). Runs one
// full simulation per kept sample and touches nothing outside the support.
inline LossEstimate isle_loss(const CircuitEvaluator& eval, double t_c,
                              const BiasedSampleSet& biased) {
    if (biased.kept.empty()) {
        throw std::invalid_argument("isle_loss: empty kept set");
    }
    if (!(biased.loss_le_eps > 0.0 && biased.loss_le_eps <= 1.0)) {
        throw std::domain_error("isle_loss: loss_le_eps must lie in (0,1]");
    }
    long fails = 0;
    for (const ParameterVector& x : biased.kept) {
        if (eval.fails_full(x, t_c)) ++fails;
    }
    const long n = static_cast<long>(biased.kept.size());
    return {biased.loss_le_eps * static_cast<double>(fails) / static_cast<double>(n), n, n, 0,
            EstimatorKind::isle};
}

// Weight f/f~ at a kept sample. Off-support queries are safety violations.
inline double importance_weight(const CircuitEvaluator& eval, SleMode mode, double t_eps,
                                const ParameterVector& x, double loss_le_eps) {
    if (!eval.fails_sle(x, t_eps, mode)) {
        throw std::domain_error("importance_weight: sample outside the biased support");
    }
    return loss_le_eps;
}

} // namespace isle
