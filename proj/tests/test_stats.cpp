#include <doctest.h>

#include <cmath>

#include "chemdist/stats.hpp"
#include "chemdist/errors.hpp"
#include "chemdist/rng.hpp"

using namespace chemdist;

TEST_SUITE_BEGIN("stats");

TEST_CASE("wilson interval brackets the point estimate") {
    const auto ci = wilson_interval(50, 100);
    CHECK(ci.lo < 0.5);
    CHECK(ci.hi > 0.5);
    CHECK(ci.lo == doctest::Approx(0.4038).epsilon(0.01));
    CHECK(ci.hi == doctest::Approx(0.5962).epsilon(0.01));
    const auto zero = wilson_interval(0, 50);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi > 0.0);
    CHECK_THROWS_AS(wilson_interval(1, 0), ParameterError);
}

TEST_CASE("clopper-pearson upper bound at zero successes") {
    CHECK(clopper_pearson_upper_zero(100) ==
          doctest::Approx(1.0 - std::pow(0.05, 0.01)).epsilon(1e-12));
    CHECK(clopper_pearson_upper_zero(10, 0.01) ==
          doctest::Approx(1.0 - std::pow(0.01, 0.1)).epsilon(1e-12));
}

TEST_CASE("mean and standard error") {
    const auto ms = mean_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == doctest::Approx(2.5));
    // sd = sqrt(5/3), se = sd/2
    CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("quartiles with interpolation") {
    const auto q = quartiles({4.0, 1.0, 3.0, 2.0});
    CHECK(q.q25 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q75 == doctest::Approx(3.25));
    CHECK_THROWS_AS(quartiles({}), ParameterError);
}

TEST_CASE("fit_exponent: exact power law") {
    std::vector<std::pair<double, double>> pts;
    for (double m : {8.0, 16.0, 32.0, 64.0}) pts.emplace_back(m, std::pow(m, -2.0));
    const auto fit = fit_exponent(pts);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.stderr_ == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fit_exponent: constant data has slope zero") {
    const auto fit = fit_exponent({{2.0, 0.3}, {4.0, 0.3}, {8.0, 0.3}});
    CHECK(fit.slope == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_exponent: noisy synthetic slope recovered within 2 stderr") {
    rng::Stream s(1234);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i) {
        const double x = std::pow(2.0, 3 + i * 0.5);
        const double noise = 0.9 + 0.2 * s.next_unit();
        pts.emplace_back(x, std::pow(x, -1.5) * noise);
    }
    const auto fit = fit_exponent(pts);
    CHECK(std::abs(fit.slope + 1.5) < 2.0 * fit.stderr_ + 0.02);
}

TEST_CASE("fit_exponent wants three positive points") {
    CHECK_THROWS_AS(fit_exponent({{1.0, 1.0}, {2.0, 0.5}}), FitError);
    CHECK_THROWS_AS(fit_exponent({{1.0, 1.0}, {2.0, 0.0}, {4.0, 0.1}}), FitError);
}

TEST_CASE("KS statistic on a uniform stratified sample is small") {
    std::vector<double> u(10000);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(u.size());
    CHECK(ks_statistic_uniform(u) < 1e-3);
    CHECK(ks_critical(0.01, 100000) == doctest::Approx(1.6276 / std::sqrt(1e5)).epsilon(1e-3));
}

TEST_SUITE_END();
