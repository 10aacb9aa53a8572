#include "chemdist/models.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "chemdist/ellipse.hpp"
#include "chemdist/quadrature.hpp"

namespace chemdist {

namespace {

enum Purpose : std::uint64_t { kPairStream = 0x10 };

double sane_cell(const Window& w, double wanted) {
    const double per_axis = w.dim == 1 ? 1e6 : (w.dim == 2 ? 2048.0 : 128.0);
    return std::max(wanted, w.padded_side() / per_axis);
}

double median_mark(const MarkedPointCloud& cloud) {
    if (cloud.size() == 0) return 0.5;
    std::vector<double> m(cloud.marks);
    auto mid = m.begin() + m.size() / 2;
    std::nth_element(m.begin(), mid, m.end());
    return *mid;
}

double r_pow_d(double r2, int dim) {
    switch (dim) {
        case 1: return std::sqrt(r2);
        case 2: return r2;
        case 3: return r2 * std::sqrt(r2);
        default: return std::pow(r2, dim / 2.0);
    }
}

// All-pairs walk for polynomial profiles. Pairs whose probability cannot
// beat the smallest coin are skipped before hashing; the skip threshold has
// one spare bit against rounding in profile_value.
template <int D>
void wdrcm_poly_pairs(const MarkedPointCloud& cloud, const ConnectionKernel& k,
                      std::uint64_t edge_seed, const EdgeVisitor& fn) {
    const std::size_t n = cloud.size();
    const int d = cloud.dim();
    const double t_skip = std::pow(2.0, 55.0 / k.delta);
    const bool use_g = k.gamma > 0.0, use_gp = k.gamma_prime > 0.0;

    std::vector<double> mg, mgp;
    if (use_g) {
        mg.resize(n);
        for (std::size_t i = 0; i < n; ++i) mg[i] = std::pow(cloud.marks[i], k.gamma);
    }
    if (use_gp) {
        mgp.resize(n);
        for (std::size_t i = 0; i < n; ++i) mgp[i] = std::pow(cloud.marks[i], k.gamma_prime);
    }

    const double* xs = cloud.coords.data();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double* pi = xs + i * static_cast<std::size_t>(d);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* pj = xs + j * static_cast<std::size_t>(d);
            double r2 = 0.0;
            if constexpr (D >= 1) {
                const double dx = pi[0] - pj[0];
                r2 = dx * dx;
            }
            if constexpr (D >= 2) {
                const double dy = pi[1] - pj[1];
                r2 += dy * dy;
            }
            if constexpr (D >= 3) {
                const double dz = pi[2] - pj[2];
                r2 += dz * dz;
            }
            if constexpr (D == 0) r2 = squared_distance(cloud.location(i), cloud.location(j));

            double t = k.amplitude * r_pow_d(r2, d);
            if (use_g) t *= std::min(mg[i], mg[j]);    // u^gamma is increasing in u
            if (use_gp) t *= std::max(mgp[i], mgp[j]);
            if (t <= 1.0) {
                fn(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            } else if (t < t_skip) {
                const double p = profile_value(k, t);
                if (rng::keyed_unit_open(pair_coin_key(edge_seed, cloud.keys[i], cloud.keys[j])) < p)
                    fn(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
    }
}

// Indicator profiles carry no pair randomness: the edge set is a function
// of the cloud, enumerated through a grid from the smaller-mark endpoint.
void wdrcm_indicator_pairs(const MarkedPointCloud& cloud, const ConnectionKernel& k,
                           const EdgeVisitor& fn) {
    const std::size_t n = cloud.size();
    if (n < 2) return;
    const int d = cloud.dim();
    const double gt = k.gamma + k.gamma_prime;

    if (gt == 0.0) {
        // Fixed reach (A * r^d <= 1).
        const double reach = std::pow(k.amplitude, -1.0 / d);
        GridIndex grid(cloud, sane_cell(cloud.window, reach));
        for (std::uint32_t i = 0; i < n; ++i) {
            grid.for_candidates(cloud.location(i), reach * (1.0 + 1e-9), [&](std::uint32_t j) {
                if (j <= i) return;
                const double r2 = squared_distance(cloud.location(i), cloud.location(j));
                if (k.amplitude * r_pow_d(r2, d) <= 1.0) fn(i, j);
            });
        }
        return;
    }

    const double med_reach = std::pow(k.amplitude * std::pow(median_mark(cloud), gt), -1.0 / d);
    GridIndex grid(cloud, sane_cell(cloud.window, med_reach));
    for (std::uint32_t i = 0; i < n; ++i) {
        const double ui = cloud.marks[i];
        // Largest possible reach when i is the smaller mark.
        const double reach = std::pow(k.amplitude * std::pow(ui, gt), -1.0 / d);
        grid.for_candidates(cloud.location(i), reach * (1.0 + 1e-9), [&](std::uint32_t j) {
            if (j == i) return;
            const double uj = cloud.marks[j];
            if (uj < ui || (uj == ui && cloud.keys[j] <= cloud.keys[i])) return;  // i must be min
            const double r2 = squared_distance(cloud.location(i), cloud.location(j));
            if (kernel_argument(k, ui, uj, r_pow_d(r2, d)) <= 1.0)
                fn(std::min(i, j), std::max(i, j));
        });
    }
}

}  // namespace

std::uint64_t edge_stream_seed(std::uint64_t seed) { return rng::key_of({seed, kPairStream}); }

bool SpatialGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
    const auto& list = adj[a];
    return std::binary_search(list.begin(), list.end(), b);
}

SpatialGraph make_graph(MarkedPointCloud cloud,
                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    SpatialGraph g;
    g.cloud = std::move(cloud);
    g.adj.assign(g.cloud.size(), {});
    for (auto [a, b] : edges) {
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
    }
    for (auto& list : g.adj) std::sort(list.begin(), list.end());
    g.edge_count = edges.size();
    return g;
}

void for_each_wdrcm_edge(const MarkedPointCloud& cloud, const ConnectionKernel& kernel,
                         std::uint64_t seed, const EdgeVisitor& fn) {
    kernel.validate();
    if (cloud.size() < 2) return;
    if (kernel.indicator()) {
        wdrcm_indicator_pairs(cloud, kernel, fn);
        return;
    }
    const std::uint64_t es = edge_stream_seed(seed);
    switch (cloud.dim()) {
        case 1: wdrcm_poly_pairs<1>(cloud, kernel, es, fn); break;
        case 2: wdrcm_poly_pairs<2>(cloud, kernel, es, fn); break;
        case 3: wdrcm_poly_pairs<3>(cloud, kernel, es, fn); break;
        default: wdrcm_poly_pairs<0>(cloud, kernel, es, fn); break;
    }
}

SpatialGraph connect_wdrcm(const MarkedPointCloud& cloud, const ConnectionKernel& kernel,
                           std::uint64_t seed) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for_each_wdrcm_edge(cloud, kernel, seed,
                        [&](std::uint32_t a, std::uint32_t b) { edges.emplace_back(a, b); });
    return make_graph(cloud, edges);
}

void for_each_lrp_edge(const MarkedPointCloud& cloud, double delta, double amplitude,
                       std::uint64_t seed, const EdgeVisitor& fn) {
    if (!cloud.lattice)
        throw UsageError("long-range percolation requires a lattice cloud");
    if (!(delta > 1.0)) throw ParameterError("lrp: delta must exceed 1");
    if (!(amplitude >= 0.0)) throw ParameterError("lrp: amplitude must be nonnegative");
    if (amplitude == 0.0 || cloud.size() < 2) return;

    const std::size_t n = cloud.size();
    const int d = cloud.dim();
    const std::uint64_t es = edge_stream_seed(seed);

    if (d == 1) {
        // Coordinates ascend; probabilities tabulated per integer gap.
        const double span = cloud.coords[n - 1] - cloud.coords[0];
        const auto max_gap = static_cast<std::size_t>(std::llround(span));
        std::vector<double> prob(max_gap + 1, 0.0);
        for (std::size_t r = 1; r <= max_gap; ++r)
            prob[r] = std::min(1.0, amplitude * std::pow(static_cast<double>(r), -delta));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto gap =
                    static_cast<std::size_t>(std::llround(cloud.coords[j] - cloud.coords[i]));
                const double p = prob[gap];
                if (pair_coin(es, cloud.keys[i], cloud.keys[j], p))
                    fn(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
        return;
    }

    std::unordered_map<long long, double> cache;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r2 = squared_distance(cloud.location(i), cloud.location(j));
            const auto key = static_cast<long long>(std::llround(r2));
            auto it = cache.find(key);
            if (it == cache.end()) {
                const double p =
                    std::min(1.0, amplitude * std::pow(static_cast<double>(key), -d * delta / 2.0));
                it = cache.emplace(key, p).first;
            }
            if (pair_coin(es, cloud.keys[i], cloud.keys[j], it->second))
                fn(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
}

SpatialGraph connect_long_range_percolation(const MarkedPointCloud& cloud, double delta,
                                            double amplitude, std::uint64_t seed) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for_each_lrp_edge(cloud, delta, amplitude, seed,
                      [&](std::uint32_t a, std::uint32_t b) { edges.emplace_back(a, b); });
    return make_graph(cloud, edges);
}

void InterferenceParams::validate() const {
    if (!(beta > 0.0) || beta >= 1.0)
        throw ParameterError("interference: beta must lie in (0,1)");
    base.validate();
    if (base.gamma_prime != 0.0)
        throw ParameterError("interference: base kernel must have gamma' = 0");
}

double InterferenceParams::ball_radius(double mark, int dim) const {
    return std::pow(mark, -beta / dim);
}

std::vector<std::uint32_t> interference_denominators(const MarkedPointCloud& cloud,
                                                     const InterferenceParams& params) {
    params.validate();
    const std::size_t n = cloud.size();
    const int d = cloud.dim();
    std::vector<std::uint32_t> denom(n, 1);
    if (n == 0) return denom;

    GridIndex grid(cloud, sane_cell(cloud.window, params.ball_radius(median_mark(cloud), d)));
    const Box measured = cloud.window.measurement_box();
    const Box padded = cloud.window.padded_box();

    for (std::uint32_t i = 0; i < n; ++i) {
        const auto loc = cloud.location(i);
        const double radius = params.ball_radius(cloud.marks[i], d);
        if (measured.contains(loc)) {
            for (int a = 0; a < d; ++a) {
                if (loc[a] - radius < padded.lo(a) || loc[a] + radius > padded.hi(a))
                    throw BoundaryError(
                        "interference ball exits the padded window; increase pad");
            }
        }
        denom[i] =
            static_cast<std::uint32_t>(grid.count_within(loc, radius * radius));
    }
    return denom;
}

SpatialGraph connect_interference(const MarkedPointCloud& cloud, const InterferenceParams& params,
                                  std::uint64_t seed) {
    const std::vector<std::uint32_t> denom = interference_denominators(cloud, params);
    const std::size_t n = cloud.size();
    const int d = cloud.dim();
    const std::uint64_t es = edge_stream_seed(seed);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // The smaller mark is the transmitting side; its ball interferes.
            const bool i_strong =
                cloud.marks[i] < cloud.marks[j] ||
                (cloud.marks[i] == cloud.marks[j] && cloud.keys[i] < cloud.keys[j]);
            const std::size_t s = i_strong ? i : j;
            const double r2 = squared_distance(cloud.location(i), cloud.location(j));
            const double bare = profile_value(
                params.base, kernel_argument(params.base, cloud.marks[i], cloud.marks[j],
                                             r_pow_d(r2, d)));
            const double p = bare / static_cast<double>(denom[s]);
            if (pair_coin(es, cloud.keys[i], cloud.keys[j], p))
                edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
    return make_graph(cloud, edges);
}

void EllipseParams::validate() const {
    if (!(gamma > 0.0) || gamma >= 2.0)
        throw ParameterError("ellipses: gamma must lie in (0,2)");
}

double EllipseParams::major_axis(double mark) const { return std::pow(mark, -gamma / 2.0); }

SpatialGraph connect_ellipses(const MarkedPointCloud& cloud, const EllipseParams& params,
                              std::uint64_t seed) {
    (void)seed;  // grains are a deterministic function of the cloud
    params.validate();
    if (cloud.dim() != 2) throw UsageError("ellipses percolation is planar (dim = 2)");
    if (!cloud.has_orientations() && cloud.size() > 0)
        throw UsageError("ellipses percolation needs a cloud with orientations");

    const std::size_t n = cloud.size();
    std::vector<double> axis(n);
    double a_max = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        axis[i] = params.major_axis(cloud.marks[i]);
        a_max = std::max(a_max, axis[i]);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    if (n >= 2) {
        GridIndex grid(cloud, sane_cell(cloud.window, 2.0));
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto pi = cloud.location(i);
            const Ellipse ei{pi[0], pi[1], axis[i], 1.0, cloud.orientations[i]};
            grid.for_candidates(pi, (axis[i] + a_max) * (1.0 + 1e-9), [&](std::uint32_t j) {
                if (j <= i) return;
                const auto pj = cloud.location(j);
                const Ellipse ej{pj[0], pj[1], axis[j], 1.0, cloud.orientations[j]};
                if (ellipses_intersect(ei, ej)) edges.emplace_back(i, j);
            });
        }
    }
    return make_graph(cloud, edges);
}

namespace {

double mark_flatten_exponent(const ConnectionKernel& k) {
    return std::max(1.0 / (1.0 - k.gamma), 1.0 / (2.0 - k.gamma - k.gamma_prime));
}

// Integral over r of r^(d-1) * rho(c r^d) from `radius` upward (radius 0
// gives the full integral); closed form in c = amplitude * u^g * v^g'.
double radial_tail(const ConnectionKernel& k, int dim, double c, double radius) {
    c = std::max(c, 1e-280);  // keep the closed form finite under extreme marks
    const double rd = std::pow(radius, dim);
    const double full = 1.0 / (dim * c);
    if (k.indicator()) return std::max(0.0, full - rd / dim);
    const double t0 = c * rd;
    if (t0 >= 1.0) return full * std::pow(t0, 1.0 - k.delta) / (k.delta - 1.0);
    return (full - rd / dim) + full / (k.delta - 1.0);
}

double mark_double_integral(const ConnectionKernel& k, int dim, double radius, double rel_tol) {
    // 2 * Int_0^1 du Int_u^1 dv radial_tail(c(u,v)); v-kink where c r^d = 1.
    auto outer = [&](double u) {
        if (u < 1e-120) return 0.0;  // negligible mass, avoids underflow
        const double ug = std::pow(u, k.gamma);
        std::vector<double> splits;
        if (radius > 0.0 && k.gamma_prime > 0.0) {
            const double t = k.amplitude * ug * std::pow(radius, dim);
            if (t > 0.0) {
                const double vstar = std::pow(t, -1.0 / k.gamma_prime);
                if (vstar > u && vstar < 1.0) splits.push_back(vstar);
            }
        }
        auto inner = [&](double v) {
            const double c = k.amplitude * ug * std::pow(v, k.gamma_prime);
            return radial_tail(k, dim, c, radius);
        };
        return quad::integrate_log(inner, u, 1.0, rel_tol * 0.1, splits);
    };
    return 2.0 * quad::integrate_unit_singular(outer, mark_flatten_exponent(k), rel_tol);
}

}  // namespace

double expected_degree(const ConnectionKernel& kernel, double intensity, int dim) {
    kernel.validate();
    if (!(intensity > 0.0)) throw ParameterError("expected_degree: intensity must be positive");
    if (dim < 1) throw ParameterError("expected_degree: dim must be >= 1");
    const double marks = mark_double_integral(kernel, dim, 0.0, 1e-6);
    return intensity * unit_sphere_area(dim) * marks;
}

double expected_degree_tail(const ConnectionKernel& kernel, double intensity, int dim,
                            double radius) {
    kernel.validate();
    if (!(radius >= 0.0)) throw ParameterError("expected_degree_tail: radius must be >= 0");
    const double marks = mark_double_integral(kernel, dim, radius, 1e-5);
    return intensity * unit_sphere_area(dim) * marks;
}

void write_edge_csv(std::ostream& out, const SpatialGraph& graph) {
    out << "id_a,id_b\n";
    graph.for_each_edge([&](std::uint32_t a, std::uint32_t b) { out << a << "," << b << "\n"; });
}

}  // namespace chemdist
