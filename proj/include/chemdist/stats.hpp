#ifndef CHEMDIST_STATS_HPP
#define CHEMDIST_STATS_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace chemdist {

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Wilson score interval for a binomial proportion (default 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

// One-sided Clopper-Pearson upper bound; exact for zero successes.
double clopper_pearson_upper_zero(std::uint64_t trials, double alpha = 0.05);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& values);

struct Quartiles {
    double q25 = 0.0, median = 0.0, q75 = 0.0;
};

// Linear-interpolation quantiles; input copied and sorted.
Quartiles quartiles(std::vector<double> values);

// Least-squares line with slope standard error and r^2 on (log x, log y).
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<double, double>> points;  // (log scale, log estimate)
};

// Requires >= 3 points with positive scale and estimate; throws FitError
// otherwise. Non-positive estimates must be filtered (and reported) upstream.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& scale_estimate);

// Kolmogorov-Smirnov distance of a sample against uniform(0,1).
double ks_statistic_uniform(std::vector<double> values);

// Asymptotic KS critical value at level alpha (0.01 -> 1.628/sqrt(n)).
double ks_critical(double alpha, std::size_t n);

}  // namespace chemdist

#endif
