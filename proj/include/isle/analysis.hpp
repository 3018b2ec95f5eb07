#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace isle {

// All errors are the 2-sigma confidence half-widths of the estimators, with
// the constant 2 exactly (not 1.96).

// Plain Monte Carlo: 2 * sqrt(loss * yield / n).
inline double error_mc(double loss, long n) {
    if (!(loss >= 0.0 && loss <= 1.0)) {
        throw std::domain_error("error_mc: loss must lie in [0,1]");
    }
    if (n <= 0) {
        throw std::invalid_argument("error_mc: n must be positive");
    }
    return 2.0 * std::sqrt(loss * (1.0 - loss)) / std::sqrt(static_cast<double>(n));
}

// Importance-sampled estimator: 2 * sqrt(loss * (loss_le_eps - loss) / n).
// With ideal biasing (loss_le_eps == loss) the error is zero.
inline double error_isle(double loss, double loss_le_eps, long n) {
    if (!(loss >= 0.0 && loss <= 1.0)) {
        throw std::domain_error("error_isle: loss must lie in [0,1]");
    }
    if (loss_le_eps < loss) {
        throw std::domain_error("error_isle: loss_le_eps must be >= loss");
    }
    if (n <= 0) {
        throw std::invalid_argument("error_isle: n must be positive");
    }
    return 2.0 * std::sqrt(loss * (loss_le_eps - loss)) / std::sqrt(static_cast<double>(n));
}

// Error ratio at equal sample counts: sqrt(yield / (loss_le_eps - loss)).
inline double error_ratio(double loss, double loss_le_eps) {
    if (!(loss >= 0.0 && loss < 1.0)) {
        throw std::domain_error("error_ratio: loss must lie in [0,1)");
    }
    if (!(loss_le_eps > loss)) {
        throw std::domain_error("error_ratio: loss_le_eps must exceed loss");
    }
    return std::sqrt((1.0 - loss) / (loss_le_eps - loss));
}

// Simulation-count gain at equal error: yield / (loss_le_eps - loss).
inline double theoretical_gain(double loss, double loss_le_eps) {
    if (!(loss >= 0.0 && loss < 1.0)) {
        throw std::domain_error("theoretical_gain: loss must lie in [0,1)");
    }
    if (!(loss_le_eps > loss)) {
        throw std::domain_error("theoretical_gain: loss_le_eps must exceed loss");
    }
    return (1.0 - loss) / (loss_le_eps - loss);
}

// Empirical error across repetitions: twice the sample standard deviation.
inline double empirical_error(std::span<const double> estimates) {
    const std::size_t n = estimates.size();
    if (n < 2) {
        throw std::invalid_argument("empirical_error: need at least two estimates");
    }
    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : estimates) ss += (v - mean) * (v - mean);
    return 2.0 * std::sqrt(ss / static_cast<double>(n - 1));
}

// Measured gain: (n_mc / n_isle) * (err_mc / err_isle)^2.
inline double empirical_gain(double n_mc, double n_isle, double err_mc, double err_isle) {
    if (!(n_mc > 0.0) || !(n_isle > 0.0)) {
        throw std::invalid_argument("empirical_gain: sample counts must be positive");
    }
    if (!(err_mc > 0.0) || !(err_isle > 0.0)) {
        throw std::domain_error("empirical_gain: errors must be positive");
    }
    const double r = err_mc / err_isle;
    return (n_mc / n_isle) * r * r;
}

// Least-squares slope of log(y) against log(x); used to check the 1/sqrt(n)
// decay of empirical errors.
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("loglog_slope: need matching series of length >= 2");
    }
    const std::size_t n = xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw std::domain_error("loglog_slope: values must be positive");
        }
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::domain_error("loglog_slope: degenerate x values");
    }
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

inline double mean_of(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("mean_of: empty series");
    }
    double m = 0.0;
    for (double v : values) m += v;
    return m / static_cast<double>(values.size());
}

} // namespace isle
