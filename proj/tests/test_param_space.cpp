#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "isle/param_space.hpp"

using namespace isle;
using Catch::Approx;

TEST_CASE("parameter sets expose the documented axes and sigmas") {
    const ParameterSet one = make_parameter_set(SetTag::OnePar);
    const ParameterSet two = make_parameter_set(SetTag::TwoPar);
    const ParameterSet three = make_parameter_set(SetTag::ThrPar);

    REQUIRE(one.dim() == 1);
    REQUIRE(two.dim() == 2);
    REQUIRE(three.dim() == 3);
    REQUIRE(one.defs[0].name == "l_eff");
    REQUIRE(two.defs[1].name == "v_dd");
    REQUIRE(three.defs[2].name == "v_th");

    // 3*sigma/mu = 15% on L_eff means sigma = 0.05 * mu
    REQUIRE(one.defs[0].sigma == Approx(6.5e-9).epsilon(1e-15));
    REQUIRE(one.defs[0].sigma == Approx(0.05 * one.defs[0].mu).epsilon(1e-15));
    REQUIRE(three.defs[1].sigma == Approx(0.04).epsilon(1e-15));
    REQUIRE(three.defs[2].sigma == Approx(0.01).epsilon(1e-15));

    REQUIRE(to_string(SetTag::OnePar) == std::string("one"));
    REQUIRE(to_string(SetTag::ThrPar) == std::string("three"));
}

TEST_CASE("parameter set construction rejects non-positive scales") {
    Nominals bad;
    bad.l_eff = 0.0;
    REQUIRE_THROWS_AS(make_parameter_set(SetTag::OnePar, bad), std::invalid_argument);
    SigmaRatios zero;
    zero.l_eff = 0.0;
    REQUIRE_THROWS_AS(make_parameter_set(SetTag::OnePar, {}, zero), std::invalid_argument);
}

TEST_CASE("gaussian density matches hand-computed values") {
    const ParameterSet one = make_parameter_set(SetTag::OnePar);
    ParameterVector x = nominal_vector(one);

    REQUIRE(density(one, x) == Approx(61375735.446374258).epsilon(1e-12));
    x[0] += one.defs[0].sigma;
    REQUIRE(density(one, x) == Approx(37226265.310637438).epsilon(1e-12));

    const ParameterSet three = make_parameter_set(SetTag::ThrPar);
    REQUIRE(density(three, nominal_vector(three)) == Approx(24420629205.477296).epsilon(1e-12));

    ParameterVector wrong;
    wrong.n = 2;
    REQUIRE_THROWS_AS(density(one, wrong), std::invalid_argument);
}

TEST_CASE("draws are random-access, deterministic, and stream separated") {
    const ParameterSet three = make_parameter_set(SetTag::ThrPar);
    const RandomSource a{123, 7};
    const RandomSource b{123, 8};

    const ParameterVector x1 = draw_at(three, a, 41);
    const ParameterVector x2 = draw_at(three, a, 41);
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(x1[j] == x2[j]);

    const ParameterVector y = draw_at(three, b, 41);
    bool differs = false;
    for (std::size_t j = 0; j < 3; ++j) differs = differs || (y[j] != x1[j]);
    REQUIRE(differs);

    // component j of draw i consumes uniform index i*dim + j
    const ParameterVector x = draw_at(three, a, 5);
    for (std::size_t j = 0; j < 3; ++j) {
        const double z = normal_draw(a, 5 * 3 + j);
        REQUIRE(x[j] == three.defs[j].mu + three.defs[j].sigma * z);
    }
}

TEST_CASE("draw moments match the configured distribution") {
    const ParameterSet one = make_parameter_set(SetTag::OnePar);
    const RandomSource src{987654, 3};
    const std::size_t n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = draw_at(one, src, i)[0];
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sumsq / static_cast<double>(n) - mean * mean;
    const double mu = one.defs[0].mu;
    const double sig = one.defs[0].sigma;
    REQUIRE(std::fabs(mean - mu) < 5.0 * sig / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::sqrt(var) == Approx(sig).epsilon(0.05));
}

TEST_CASE("draw audit tracks extremes without false sixes") {
    const ParameterSet three = make_parameter_set(SetTag::ThrPar);
    const RandomSource src{2024, 1};
    DrawAudit audit;
    for (std::size_t i = 0; i < 10000; ++i) draw_at(three, src, i, &audit);
    REQUIRE(audit.beyond_6_sigma == 0);
    REQUIRE(audit.max_abs_z > 3.0);
    REQUIRE(audit.max_abs_z < 6.0);
}

TEST_CASE("inverse normal cdf hits reference quantiles") {
    REQUIRE(std::fabs(inverse_normal_cdf(0.5)) < 1e-15);
    REQUIRE(inverse_normal_cdf(0.975) == Approx(1.9599639845400542).epsilon(1e-12));
    REQUIRE(inverse_normal_cdf(0.84134474606854295) == Approx(1.0).margin(1e-12));
    REQUIRE(inverse_normal_cdf(0.9) == Approx(-inverse_normal_cdf(0.1)).epsilon(1e-13));
    REQUIRE_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
    REQUIRE_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}

TEST_CASE("uniform bits stay inside the open unit interval") {
    const RandomSource src{55, 0};
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double u = uniform01(src, i);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("operating point fills omitted axes from nominals") {
    const ParameterSet one = make_parameter_set(SetTag::OnePar);
    ParameterVector x = nominal_vector(one);
    x[0] = 0.14e-6;
    const OperatingPoint op = operating_point(one, x);
    REQUIRE(op.l_eff == 0.14e-6);
    REQUIRE(op.v_dd == 1.2);
    REQUIRE(op.v_th == 0.3);

    const ParameterSet three = make_parameter_set(SetTag::ThrPar);
    ParameterVector y = nominal_vector(three);
    y[1] = 1.1;
    y[2] = 0.32;
    const OperatingPoint op3 = operating_point(three, y);
    REQUIRE(op3.v_dd == 1.1);
    REQUIRE(op3.v_th == 0.32);
}
