#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace isle {

// Identifies one reproducible random stream. Draws are addressed by index,
// not by call order, so any (seed, stream) pair yields the same sequence
// regardless of how callers interleave or parallelize their draws.
struct RandomSource {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RandomSource with_stream(std::uint64_t s) const { return {seed, s}; }
};

namespace rng_detail {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 output function (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace rng_detail

// Collapses (seed, stream) into the key of a counter-based SplitMix64 lane.
inline std::uint64_t stream_key(const RandomSource& src) {
    using namespace rng_detail;
    std::uint64_t a = mix64(src.seed + kGamma);
    std::uint64_t b = mix64(src.stream + 0x6A09E667F3BCC909ull);
    return mix64(a ^ (b + kGamma + (a << 6) + (a >> 2)));
}

inline std::uint64_t random_bits(const RandomSource& src, std::uint64_t index) {
    using namespace rng_detail;
    return mix64(stream_key(src) + (index + 1) * kGamma);
}

// Uniform on the open interval (0, 1); never returns 0 or 1, so it is safe
// to feed straight into the normal quantile.
inline double uniform01(const RandomSource& src, std::uint64_t index) {
    const std::uint64_t b = random_bits(src, index) >> 11;
    return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Newton step through erfc. Absolute error below 1e-13 over (0, 1).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("inverse_normal_cdf: p must lie in (0,1)");
    }

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Newton step: e = Phi(x) - p, Phi via erfc for tail accuracy.
    static constexpr double kSqrt2Pi = 2.5066282746310002;
    const double e = 0.5 * std::erfc(-x / 1.4142135623730951) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    return x - u;
}

// Standard normal draw at a given index of the stream.
inline double normal_draw(const RandomSource& src, std::uint64_t index) {
    return inverse_normal_cdf(uniform01(src, index));
}

} // namespace isle
