#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "isle/analysis.hpp"

using namespace isle;
using Catch::Approx;

TEST_CASE("Monte Carlo error bound matches hand-computed values") {
    REQUIRE(error_mc(0.5, 1) == 1.0);
    REQUIRE(error_mc(0.1395, 1000) == Approx(0.021912530661701309).epsilon(1e-14));
    REQUIRE(error_mc(0.0, 1000) == 0.0);
    REQUIRE(error_mc(1.0, 1000) == 0.0);
}

TEST_CASE("importance-sampling error bound matches hand-computed values") {
    REQUIRE(error_isle(0.15, 0.18, 200) == Approx(0.009486832980505138).epsilon(1e-14));
    REQUIRE(error_isle(0.15, 0.15, 200) == 0.0); // ideal biasing
    REQUIRE_THROWS_AS(error_isle(0.15, 0.10, 200), std::domain_error);
}

TEST_CASE("the two bounds shrink as one over sqrt n") {
    REQUIRE(error_mc(0.2, 400) == Approx(error_mc(0.2, 100) / 2.0).epsilon(1e-14));
    REQUIRE(error_isle(0.15, 0.18, 800) == Approx(error_isle(0.15, 0.18, 200) / 2.0).epsilon(1e-14));
}

TEST_CASE("predicted gain is yield over the biasing slack") {
    REQUIRE(theoretical_gain(0.15, 0.18) == Approx(0.85 / 0.03).epsilon(1e-14));
    REQUIRE_THROWS_AS(theoretical_gain(0.15, 0.15), std::domain_error);
    REQUIRE_THROWS_AS(theoretical_gain(0.15, 0.10), std::domain_error);

    // equal-n gain equals the squared error ratio
    const double er = error_ratio(0.15, 0.18);
    REQUIRE(theoretical_gain(0.15, 0.18) == Approx(er * er).epsilon(1e-12));
}

TEST_CASE("empirical error is twice the cross-repetition deviation") {
    const std::vector<double> two{0.1, 0.2};
    REQUIRE(empirical_error(two) == Approx(0.1414213562373095).epsilon(1e-14));

    const std::vector<double> flat{0.3, 0.3, 0.3};
    REQUIRE(empirical_error(flat) == 0.0);

    const std::vector<double> one{0.3};
    REQUIRE_THROWS_AS(empirical_error(one), std::invalid_argument);
}

TEST_CASE("empirical gain matches the benchmark arithmetic") {
    REQUIRE(empirical_gain(1000, 181, 2.35e-2, 1.15e-3) ==
            Approx(2307.0737031196149).epsilon(1e-12));
    REQUIRE(empirical_gain(1000, 181, 2.35e-2, 1.28e-3) ==
            Approx(1862.2466872410221).epsilon(1e-12));
    REQUIRE_THROWS_AS(empirical_gain(1000, 181, 2.35e-2, 0.0), std::domain_error);
}

TEST_CASE("log-log slope recovers known power laws") {
    const std::vector<double> xs{25, 50, 100, 200, 400};
    std::vector<double> half, linear;
    for (double x : xs) {
        half.push_back(3.0 / std::sqrt(x));
        linear.push_back(0.5 * x);
    }
    REQUIRE(loglog_slope(xs, half) == Approx(-0.5).margin(1e-12));
    REQUIRE(loglog_slope(xs, linear) == Approx(1.0).margin(1e-12));
}

TEST_CASE("mean helper") {
    const std::vector<double> v{1.0, 2.0, 6.0};
    REQUIRE(mean_of(v) == Approx(3.0).epsilon(1e-15));
}
