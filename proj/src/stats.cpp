#include "chemdist/stats.hpp"

#include <algorithm>
#include <cmath>

#include "chemdist/errors.hpp"

namespace chemdist {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw ParameterError("wilson_interval: zero trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // Exact endpoints at the degenerate counts.
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

double clopper_pearson_upper_zero(std::uint64_t trials, double alpha) {
    if (trials == 0) throw ParameterError("clopper_pearson: zero trials");
    return 1.0 - std::pow(alpha, 1.0 / static_cast<double>(trials));
}

MeanStderr mean_stderr(const std::vector<double>& values) {
    MeanStderr out;
    out.n = values.size();
    if (out.n == 0) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (static_cast<double>(out.n) * (static_cast<double>(out.n) - 1.0)));
    return out;
}

namespace {
double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}
}  // namespace

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw ParameterError("quartiles: empty sample");
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
            quantile_sorted(values, 0.75)};
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& scale_estimate) {
    ExponentFit fit;
    for (auto [scale, estimate] : scale_estimate) {
        if (scale > 0.0 && estimate > 0.0)
            fit.points.emplace_back(std::log(scale), std::log(estimate));
    }
    const std::size_t k = fit.points.size();
    if (k < 3) throw FitError("fit_exponent: need at least 3 positive points");

    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : fit.points) { sx += x; sy += y; }
    const double mx = sx / static_cast<double>(k), my = sy / static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto [x, y] : fit.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw FitError("fit_exponent: degenerate scales");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    double ss_res = 0.0;
    for (auto [x, y] : fit.points) {
        const double r = y - (fit.intercept + fit.slope * x);
        ss_res += r * r;
    }
    fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    fit.stderr_ = k > 2 ? std::sqrt(ss_res / (static_cast<double>(k) - 2.0) / sxx) : 0.0;
    return fit;
}

double ks_statistic_uniform(std::vector<double> values) {
    if (values.empty()) throw ParameterError("ks_statistic: empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = (static_cast<double>(i) + 1.0) / n;
        d = std::max({d, values[i] - lo, hi - values[i]});
    }
    return d;
}

double ks_critical(double alpha, std::size_t n) {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(static_cast<double>(n));
}

}  // namespace chemdist
