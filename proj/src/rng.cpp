#include "chemdist/rng.hpp"

#include <cmath>

#include "chemdist/errors.hpp"

namespace chemdist::rng {

namespace {

// Count arrivals of a unit-rate Poisson process up to `mean`.
std::uint64_t poisson_race(Stream& stream, double mean) {
    std::uint64_t k = 0;
    double sum = -std::log(stream.next_unit_open());
    while (sum <= mean) {
        ++k;
        sum += -std::log(stream.next_unit_open());
    }
    return k;
}

// Hoermann's PTRD transformed-rejection sampler, exact for mean >= 10.
std::uint64_t poisson_ptrd(Stream& stream, double mean) {
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mean);

    for (;;) {
        double u = stream.next_unit_open() - 0.5;
        double v = stream.next_unit_open();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
        double rhs = -mean + k * log_mu - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
}

}  // namespace

std::uint64_t poisson(Stream& stream, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw ParameterError("poisson: mean must be finite and nonnegative");
    }
    if (mean < 10.0) return poisson_race(stream, mean);
    return poisson_ptrd(stream, mean);
}

}  // namespace chemdist::rng
