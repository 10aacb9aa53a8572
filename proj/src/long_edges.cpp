#include "chemdist/long_edges.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chemdist/quadrature.hpp"

namespace chemdist {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ZetaResult zeta(double delta, double gamma, double gamma_prime) {
    if (!(gamma >= 0.0) || gamma >= 1.0)
        throw ParameterError("zeta: gamma must lie in [0,1)");
    if (!(gamma_prime >= 0.0) || gamma_prime >= 2.0 - gamma)
        throw ParameterError("zeta: gamma' must lie in [0, 2-gamma)");
    if (!(delta > 1.0)) throw ParameterError("zeta: delta must exceed 1");

    const double t1 = std::isinf(delta) ? -kInf : 2.0 - delta;

    double t2;
    if (gamma == 0.0) {
        t2 = -kInf;  // numerator 1-delta < 0 against a vanishing denominator
    } else if (std::isinf(delta)) {
        t2 = 1.0 - 1.0 / gamma;
    } else {
        t2 = 1.0 - (delta - 1.0) / (gamma * delta);
    }

    const double num3 = gamma_prime + gamma - 1.0;
    double t3;
    if (gamma == 0.0) {
        if (num3 >= 0.0) return {0.0, false};
        t3 = -kInf;
    } else {
        t3 = num3 / gamma;
    }

    const double sum4 = gamma + gamma_prime;
    const double t4 = sum4 == 0.0 ? -kInf : 2.0 * num3 / sum4;

    return {std::max({t1, t2, t3, t4}), true};
}

LongEdgeScan detect_L(const SpatialGraph& graph, double m, double n) {
    if (!(m > 0.0) || !(n > 0.0)) throw ParameterError("detect_L: m and n must be positive");
    if (m > graph.cloud.window.side * (1.0 + 1e-12))
        throw UsageError("detect_L: box exceeds the measurement window");

    const Box box{graph.cloud.window.center, m};
    LongEdgeScan scan;
    graph.for_each_edge([&](std::uint32_t a, std::uint32_t b) {
        const auto pa = graph.cloud.location(a);
        const auto pb = graph.cloud.location(b);
        if (!box.contains(pa) || !box.contains(pb)) return;
        scan.max_internal_length = std::max(scan.max_internal_length, distance(pa, pb));
    });
    scan.detected = scan.max_internal_length > n;
    return scan;
}

namespace {

// Indicator-profile WDRCM: an internal edge longer than n forces the smaller
// endpoint mark below (A n^d)^(-1/(gamma+gamma')). Marks are inspected
// first; coordinates are only drawn when a candidate exists.
bool detect_indicator_lazy(const ModelSpec& spec, const Window& window, double m, double n,
                           std::uint64_t seed) {
    const ConnectionKernel k = spec.kernel();
    const int d = spec.dim;
    const double nd = std::pow(n, d);
    const double gt = k.gamma + k.gamma_prime;
    if (gt == 0.0) {
        // Bounded reach A r^d <= 1.
        if (k.amplitude * nd >= 1.0) return false;
        const auto graph = build_graph(spec, window, seed);
        return detect_L(graph, m, n).detected;
    }
    const double u_threshold = std::pow(k.amplitude * nd, -1.0 / gt);

    const std::uint64_t count = poisson_draws::count(window, spec.intensity, seed);
    std::vector<std::uint32_t> candidates;
    for (std::uint64_t i = 0; i < count; ++i)
        if (poisson_draws::mark(seed, i) < u_threshold)
            candidates.push_back(static_cast<std::uint32_t>(i));
    if (candidates.empty()) return false;

    // Materialise and scan candidate x everything.
    MarkedPointCloud cloud = sample_poisson(window, spec.intensity, seed);
    const Box box{window.center, m};
    const double n2 = n * n;
    for (std::uint32_t c : candidates) {
        const auto pc = cloud.location(c);
        if (!box.contains(pc)) continue;
        for (std::uint32_t j = 0; j < cloud.size(); ++j) {
            if (j == c) continue;
            const auto pj = cloud.location(j);
            if (!box.contains(pj)) continue;
            const double r2 = squared_distance(pc, pj);
            if (r2 <= n2) continue;
            const double rd = d == 2 ? r2 : std::pow(r2, d / 2.0);
            if (kernel_argument(k, cloud.marks[c], cloud.marks[j], rd) <= 1.0) return true;
        }
    }
    return false;
}

// Polynomial-profile WDRCM: enumerate exactly the pairs farther than n via
// a coarse grid (cell pairs whose farthest corners stay within n cannot
// contribute), then flip each pair's keyed coin.
bool detect_polynomial_far_pairs(const ModelSpec& spec, const Window& window, double m, double n,
                                 std::uint64_t seed) {
    MarkedPointCloud cloud = sample_poisson(window, spec.intensity, seed);
    if (cloud.size() < 2) return false;
    const ConnectionKernel k = spec.kernel();
    const int d = spec.dim;
    const std::uint64_t es = edge_stream_seed(seed);

    const Box box{window.center, m};
    const double cell = std::max(n / 4.0, window.padded_side() / 64.0);
    const int per_axis = std::max(1, static_cast<int>(std::ceil(window.padded_side() / cell)));

    // Bin points (only those inside the box matter).
    std::vector<std::vector<std::uint32_t>> cells(
        static_cast<std::size_t>(std::pow(per_axis, d)));
    std::vector<double> lo(d);
    for (int a = 0; a < d; ++a) lo[a] = window.center[a] - window.padded_side() / 2.0;
    auto cell_of = [&](std::span<const double> p) {
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) {
            int c = static_cast<int>((p[a] - lo[a]) / cell);
            c = std::clamp(c, 0, per_axis - 1);
            idx = idx * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(c);
        }
        return idx;
    };
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        if (box.contains(cloud.location(i))) cells[cell_of(cloud.location(i))].push_back(i);
    }

    // Decode cell index -> per-axis coordinates.
    auto axes_of = [&](std::size_t idx, std::vector<int>& at) {
        for (int a = d - 1; a >= 0; --a) {
            at[a] = static_cast<int>(idx % static_cast<std::size_t>(per_axis));
            idx /= static_cast<std::size_t>(per_axis);
        }
    };

    const double n2 = n * n;
    const double t_skip = std::pow(2.0, 55.0 / k.delta);
    std::vector<int> ca(d), cb(d);
    for (std::size_t c1 = 0; c1 < cells.size(); ++c1) {
        if (cells[c1].empty()) continue;
        axes_of(c1, ca);
        for (std::size_t c2 = c1; c2 < cells.size(); ++c2) {
            if (cells[c2].empty()) continue;
            axes_of(c2, cb);
            double max2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double gap = (std::abs(ca[a] - cb[a]) + 1) * cell;
                max2 += gap * gap;
            }
            if (max2 <= n2) continue;  // every pair here is within n

            for (std::uint32_t i : cells[c1]) {
                const auto pi = cloud.location(i);
                for (std::uint32_t j : cells[c2]) {
                    if (c1 == c2 && j <= i) continue;
                    const double r2 = squared_distance(pi, cloud.location(j));
                    if (r2 <= n2) continue;
                    const double rd = d == 2 ? r2 : std::pow(r2, d / 2.0);
                    const double t = kernel_argument(k, cloud.marks[i], cloud.marks[j], rd);
                    if (t <= 1.0) return true;
                    if (t >= t_skip) continue;
                    const double p = profile_value(k, t);
                    if (rng::keyed_unit_open(pair_coin_key(es, cloud.keys[i], cloud.keys[j])) < p)
                        return true;
                }
            }
        }
    }
    return false;
}

// Lattice long-range percolation, far pairs only.
bool detect_lrp_far_pairs(const ModelSpec& spec, const Window& window, double m, double n,
                          std::uint64_t seed) {
    MarkedPointCloud cloud = sample_site_lattice(window, spec.retention, seed);
    if (cloud.size() < 2) return false;
    const std::uint64_t es = edge_stream_seed(seed);
    const Box box{window.center, m};
    const double n2 = n * n;
    const int d = spec.dim;
    bool found = false;
    for (std::uint32_t i = 0; i + 1 < cloud.size() && !found; ++i) {
        if (!box.contains(cloud.location(i))) continue;
        for (std::uint32_t j = i + 1; j < cloud.size(); ++j) {
            if (!box.contains(cloud.location(j))) continue;
            const double r2 = squared_distance(cloud.location(i), cloud.location(j));
            if (r2 <= n2) continue;
            const double p =
                std::min(1.0, spec.amplitude * std::pow(r2, -d * spec.delta / 2.0));
            if (pair_coin(es, cloud.keys[i], cloud.keys[j], p)) {
                found = true;
                break;
            }
        }
    }
    return found;
}

}  // namespace

bool replicate_detects_long_edge(const ModelSpec& model, double m, double n,
                                 std::uint64_t replicate_seed_value) {
    model.validate();
    // Pair-independent models need no pad for box-internal events.
    const double pad = model.pair_independent() ? std::max(0.0, model.pad) : model.resolved_pad();
    const Window window(model.dim, m, pad);

    switch (model.kind) {
        case ModelKind::Gilbert:
        case ModelKind::Boolean:
            return detect_indicator_lazy(model, window, m, n, replicate_seed_value);
        case ModelKind::SoftBoolean:
        case ModelKind::Wdrcm:
            if (model.kernel().indicator())
                return detect_indicator_lazy(model, window, m, n, replicate_seed_value);
            return detect_polynomial_far_pairs(model, window, m, n, replicate_seed_value);
        case ModelKind::Lrp:
            return detect_lrp_far_pairs(model, window, m, n, replicate_seed_value);
        default: {
            const auto graph = build_graph(model, window, replicate_seed_value);
            return detect_L(graph, m, n).detected;
        }
    }
}

PLEstimate estimate_P_L(const ModelSpec& model, double m, double n, std::uint64_t replicates,
                        std::uint64_t seed) {
    if (replicates == 0) throw ParameterError("estimate_P_L: zero replicates");
    PLEstimate out;
    out.m = m;
    out.n = n;
    out.replicates = replicates;
    out.seed = seed;
    for (std::uint64_t r = 0; r < replicates; ++r) {
        if (replicate_detects_long_edge(model, m, n, replicate_seed(seed, r))) ++out.successes;
    }
    out.estimate = static_cast<double>(out.successes) / static_cast<double>(replicates);
    out.ci = wilson_interval(out.successes, replicates);
    return out;
}

double bracket_integral(const ConnectionKernel& kernel, double r, int dim) {
    kernel.validate();
    if (!(r > 1.0)) throw ParameterError("bracket_integral: r must exceed 1");
    if (dim < 1) throw ParameterError("bracket_integral: dim must be >= 1");

    const ZetaResult z = zeta(kernel.delta, kernel.gamma, kernel.gamma_prime);
    if (!z.defined) throw ParameterError("bracket_integral: zeta undefined for these parameters");

    const double rd = std::pow(r, dim);
    const double r2d = rd * rd;

    if (std::isinf(z.value)) {
        // gamma = gamma' = 0 with an indicator profile: constant integrand.
        return r2d * profile_value(kernel, kernel.amplitude * rd);
    }

    const double lo = std::pow(r, dim * (z.value - 1.0));

    if (kernel.gamma_prime == 0.0) {
        // Inner mark integrates to (1-u); one log-scale integral remains.
        auto f = [&](double u) {
            return (1.0 - u) *
                   profile_value(kernel, kernel.amplitude * std::pow(u, kernel.gamma) * rd);
        };
        std::vector<double> splits;
        if (kernel.gamma > 0.0) {
            const double ustar = std::pow(kernel.amplitude * rd, -1.0 / kernel.gamma);
            if (ustar > lo && ustar < 1.0) splits.push_back(ustar);
        }
        return r2d * 2.0 * quad::integrate_log(f, lo, 1.0, 1e-8, splits);
    }

    auto outer = [&](double u) {
        const double ug = std::pow(u, kernel.gamma);
        auto inner = [&](double v) {
            return profile_value(
                kernel, kernel.amplitude * ug * std::pow(v, kernel.gamma_prime) * rd);
        };
        std::vector<double> splits;
        const double base = kernel.amplitude * ug * rd;
        if (base > 0.0) {
            const double vstar = std::pow(base, -1.0 / kernel.gamma_prime);
            if (vstar > u && vstar < 1.0) splits.push_back(vstar);
        }
        return quad::integrate_log(inner, u, 1.0, 1e-9, splits);
    };
    return r2d * 2.0 * quad::integrate_log(outer, lo, 1.0, 1e-8);
}

}  // namespace chemdist
