#ifndef CHEMDIST_QUADRATURE_HPP
#define CHEMDIST_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace chemdist::quad {

namespace detail {

struct Budget {
    std::int64_t evals;
};

// Local acceptance is relative to the panel's own mass, so concentrated
// integrands refine where the mass sits and near-empty panels settle fast.
template <typename F>
double simpson_step(const F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double rel_tol, double abs_tol, int depth, Budget& budget) {
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    budget.evals -= 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double eps = std::max(abs_tol, rel_tol * (std::abs(left) + std::abs(right)));
    if (depth <= 0 || budget.evals <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return simpson_step(f, a, fa, lm, flm, m, fm, left, rel_tol, abs_tol, depth - 1, budget) +
           simpson_step(f, m, fm, rm, frm, b, fb, right, rel_tol, abs_tol, depth - 1, budget);
}

template <typename F>
double panel(const F& f, double a, double b, double rel_tol, double abs_tol, int max_depth,
             Budget& budget) {
    if (!(b > a)) return 0.0;
    const double m = (a + b) / 2.0;
    const double fa = f(a), fm = f(m), fb = f(b);
    budget.evals -= 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, m, fm, b, fb, whole, rel_tol, abs_tol, max_depth, budget);
}

}  // namespace detail

// Adaptive Simpson on [a,b]; optional interior split points (kinks). The
// evaluation budget is a hard safety stop; ordinary integrands converge far
// below it.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-7, double abs_tol = 0.0,
                 const std::vector<double>& splits = {}, int max_depth = 40,
                 std::int64_t eval_budget = 400000) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a};
    for (double s : splits)
        if (s > a && s < b) pts.push_back(s);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    detail::Budget budget{eval_budget};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += detail::panel(f, pts[i], pts[i + 1], rel_tol, abs_tol, max_depth, budget);
    return total;
}

// Integral over (0, 1] of a function with an integrable power blow-up at 0:
// substitutes u = x^flatten so that the transformed integrand stays bounded.
template <typename F>
double integrate_unit_singular(const F& f, double flatten, double rel_tol = 1e-7,
                               const std::vector<double>& splits_u = {}) {
    const double p = std::max(1.0, flatten);
    auto g = [&](double x) {
        if (x <= 0.0) return 0.0;
        const double u = std::pow(x, p);
        if (u <= 0.0) return 0.0;
        return f(u) * p * std::pow(x, p - 1.0);
    };
    std::vector<double> splits_x;
    splits_x.reserve(splits_u.size());
    for (double s : splits_u)
        if (s > 0.0 && s < 1.0) splits_x.push_back(std::pow(s, 1.0 / p));
    return integrate(g, 0.0, 1.0, rel_tol, 0.0, splits_x);
}

// Integral of f over [a, b] with 0 < a < b, evaluated in log coordinates;
// suited to integrands spanning many orders of magnitude near a.
template <typename F>
double integrate_log(const F& f, double a, double b, double rel_tol = 1e-7,
                     const std::vector<double>& splits = {}) {
    if (!(b > a) || !(a > 0.0)) return 0.0;
    auto g = [&](double w) {
        const double u = std::exp(w);
        return f(u) * u;
    };
    std::vector<double> splits_w;
    for (double s : splits)
        if (s > a && s < b) splits_w.push_back(std::log(s));
    return integrate(g, std::log(a), std::log(b), rel_tol, 0.0, splits_w);
}

}  // namespace chemdist::quad

#endif
