#include "chemdist/mixing.hpp"

#include <algorithm>
#include <cmath>

namespace chemdist {

namespace {

bool box_has_edge_longer_than(const SpatialGraph& graph, const Box& box, double n) {
    bool found = false;
    graph.for_each_edge([&](std::uint32_t a, std::uint32_t b) {
        if (found) return;
        const auto pa = graph.cloud.location(a);
        const auto pb = graph.cloud.location(b);
        if (box.contains(pa) && box.contains(pb) && distance(pa, pb) > n) found = true;
    });
    return found;
}

}  // namespace

LocalEvent stage0_bad_event() {
    return {"stage0-bad", [](const SpatialGraph& g, const Box& box) {
                return box_has_edge_longer_than(g, box, box.side / 100.0);
            }};
}

LocalEvent has_long_edge_event(double n) {
    return {"has-long-edge", [n](const SpatialGraph& g, const Box& box) {
                return box_has_edge_longer_than(g, box, n);
            }};
}

LocalEvent component_size_event(std::size_t k) {
    return {"component-of-size", [k](const SpatialGraph& g, const Box& box) {
                std::vector<std::uint8_t> inside(g.size(), 0), seen(g.size(), 0);
                for (std::uint32_t v = 0; v < g.size(); ++v)
                    inside[v] = box.contains(g.cloud.location(v)) ? 1 : 0;
                std::vector<std::uint32_t> stack;
                for (std::uint32_t v = 0; v < g.size(); ++v) {
                    if (!inside[v] || seen[v]) continue;
                    std::size_t count = 0;
                    stack.assign(1, v);
                    seen[v] = 1;
                    while (!stack.empty()) {
                        const std::uint32_t w = stack.back();
                        stack.pop_back();
                        ++count;
                        for (std::uint32_t u : g.adj[w]) {
                            if (inside[u] && !seen[u]) {
                                seen[u] = 1;
                                stack.push_back(u);
                            }
                        }
                    }
                    if (count >= k) return true;
                }
                return false;
            }};
}

LocalEvent local_event_from_name(const std::string& name) {
    if (name == "stage0-bad") return stage0_bad_event();
    if (name.rfind("has-long-edge:", 0) == 0)
        return has_long_edge_event(std::stod(name.substr(14)));
    if (name.rfind("component-of-size:", 0) == 0)
        return component_size_event(static_cast<std::size_t>(std::stoull(name.substr(18))));
    throw ParameterError("unknown local event: " + name);
}

SpatialGraph restrict_to_box(const SpatialGraph& graph, const Box& box) {
    std::vector<std::uint32_t> keep;
    std::vector<std::uint32_t> remap(graph.size(), UINT32_MAX);
    for (std::uint32_t v = 0; v < graph.size(); ++v) {
        if (box.contains(graph.cloud.location(v))) {
            remap[v] = static_cast<std::uint32_t>(keep.size());
            keep.push_back(v);
        }
    }

    MarkedPointCloud sub;
    sub.window = graph.cloud.window;
    sub.seed = graph.cloud.seed;
    sub.lattice = graph.cloud.lattice;
    for (std::uint32_t v : keep) {
        const auto loc = graph.cloud.location(v);
        sub.coords.insert(sub.coords.end(), loc.begin(), loc.end());
        sub.marks.push_back(graph.cloud.marks[v]);
        sub.keys.push_back(graph.cloud.keys[v]);
        if (graph.cloud.has_orientations())
            sub.orientations.push_back(graph.cloud.orientations[v]);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    graph.for_each_edge([&](std::uint32_t a, std::uint32_t b) {
        if (remap[a] != UINT32_MAX && remap[b] != UINT32_MAX)
            edges.emplace_back(remap[a], remap[b]);
    });
    return make_graph(std::move(sub), edges);
}

namespace {

MarkedPointCloud filter_cloud(const MarkedPointCloud& cloud, const Box& box) {
    MarkedPointCloud sub;
    sub.window = cloud.window;
    sub.seed = cloud.seed;
    sub.lattice = cloud.lattice;
    for (std::uint32_t v = 0; v < cloud.size(); ++v) {
        const auto loc = cloud.location(v);
        if (!box.contains(loc)) continue;
        sub.coords.insert(sub.coords.end(), loc.begin(), loc.end());
        sub.marks.push_back(cloud.marks[v]);
        sub.keys.push_back(cloud.keys[v]);
        if (cloud.has_orientations()) sub.orientations.push_back(cloud.orientations[v]);
    }
    return sub;
}

// Graph on the cloud points inside `box` only. Pair coins are keyed by point
// identities, so for pair-independent models this equals the restriction of
// the full-window graph realised from the same seed.
SpatialGraph build_box_subgraph(const ModelSpec& model, const MarkedPointCloud& cloud,
                                const Box& box, std::uint64_t rep_seed) {
    MarkedPointCloud sub = filter_cloud(cloud, box);
    switch (model.kind) {
        case ModelKind::Lrp:
            return connect_long_range_percolation(sub, model.delta, model.amplitude, rep_seed);
        case ModelKind::Ellipses:
            return connect_ellipses(sub, model.ellipse_params(), rep_seed);
        case ModelKind::Interference: {
            // Denominators come from the full cloud; only in-box pairs are drawn.
            const InterferenceParams params = model.interference_params();
            GridIndex grid(cloud, std::max(1.0, params.ball_radius(0.5, model.dim)));
            const std::uint64_t es = edge_stream_seed(rep_seed);
            std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
            std::vector<double> denom(sub.size());
            for (std::uint32_t i = 0; i < sub.size(); ++i) {
                const double radius = params.ball_radius(sub.marks[i], model.dim);
                denom[i] = static_cast<double>(
                    grid.count_within(sub.location(i), radius * radius));
            }
            for (std::uint32_t i = 0; i + 1 < sub.size(); ++i) {
                for (std::uint32_t j = i + 1; j < sub.size(); ++j) {
                    const bool i_strong =
                        sub.marks[i] < sub.marks[j] ||
                        (sub.marks[i] == sub.marks[j] && sub.keys[i] < sub.keys[j]);
                    const double r2 = squared_distance(sub.location(i), sub.location(j));
                    const double rd = std::pow(r2, model.dim / 2.0);
                    const double bare = profile_value(
                        params.base,
                        kernel_argument(params.base, sub.marks[i], sub.marks[j], rd));
                    const double p = bare / denom[i_strong ? i : j];
                    if (pair_coin(es, sub.keys[i], sub.keys[j], p)) edges.emplace_back(i, j);
                }
            }
            return make_graph(std::move(sub), edges);
        }
        default:
            return connect_wdrcm(sub, model.kernel(), rep_seed);
    }
}

}  // namespace

MixingSession::MixingSession(const ModelSpec& model, LocalEvent event, double m, const Vec& x)
    : model_(model), event_(std::move(event)), m_(m) {
    model_.validate();
    if (static_cast<int>(x.size()) != model_.dim)
        throw ParameterError("estimate_mixing: displacement dimension mismatch");
    double x2 = 0.0;
    for (double c : x) x2 += c * c;
    x_norm_ = std::sqrt(x2);
    if (!(x_norm_ > 2.0)) throw ParameterError("estimate_mixing: need |x| > 2");

    // Joint window covering both boxes.
    Vec center(model_.dim);
    double side = 0.0;
    for (int a = 0; a < model_.dim; ++a) {
        const double lo = std::min(-m / 2.0, m * x[a] - m / 2.0);
        const double hi = std::max(m / 2.0, m * x[a] + m / 2.0);
        center[a] = (lo + hi) / 2.0;
        side = std::max(side, hi - lo);
    }
    const double pad =
        model_.pair_independent() ? std::max(0.0, model_.pad) : model_.resolved_pad();
    window_ = Window(model_.dim, side + 1.0, pad, center);

    Vec b_center(model_.dim);
    for (int a = 0; a < model_.dim; ++a) b_center[a] = m * x[a];
    box_a_ = Box{Vec(model_.dim, 0.0), m};
    box_b_ = Box{b_center, m};
}

MixingSession::Outcome MixingSession::evaluate(std::uint64_t replicate_seed_value,
                                               bool probe) const {
    Outcome out;
    try {
        const MarkedPointCloud cloud = sample_vertices(model_, window_, replicate_seed_value);
        if (probe) {
            const SpatialGraph full = build_graph(model_, window_, replicate_seed_value);
            const SpatialGraph ra = restrict_to_box(full, box_a_);
            const SpatialGraph rb = restrict_to_box(full, box_b_);
            out.a = event_.evaluate(ra, box_a_);
            out.b = event_.evaluate(rb, box_b_);
            if (out.a != event_.evaluate(full, box_a_) ||
                out.b != event_.evaluate(full, box_b_))
                throw ContractError("local event '" + event_.name +
                                    "' changes value under box restriction");
        } else {
            out.a = event_.evaluate(
                build_box_subgraph(model_, cloud, box_a_, replicate_seed_value), box_a_);
            out.b = event_.evaluate(
                build_box_subgraph(model_, cloud, box_b_, replicate_seed_value), box_b_);
        }
    } catch (const BoundaryError&) {
        out.skipped = true;
    }
    return out;
}

MixingEstimate estimate_mixing(const ModelSpec& model, const LocalEvent& event, double m,
                               const Vec& x, std::uint64_t replicates, std::uint64_t seed) {
    if (replicates < 2) throw ParameterError("estimate_mixing: need at least 2 replicates");
    MixingSession session(model, event, m, x);

    std::uint64_t n11 = 0, n10 = 0, n01 = 0, done = 0, skipped = 0;
    for (std::uint64_t r = 0; r < replicates; ++r) {
        const auto outcome = session.evaluate(replicate_seed(seed, r), r < 2);
        if (outcome.skipped) {
            ++skipped;
            if (skipped * 50 > replicates)
                throw BoundaryError("estimate_mixing: too many boundary failures; increase pad");
            continue;
        }
        ++done;
        if (outcome.a && outcome.b) ++n11;
        else if (outcome.a) ++n10;
        else if (outcome.b) ++n01;
    }
    if (done < 2) throw UsageError("estimate_mixing: fewer than 2 usable replicates");

    const double x_norm = session.x_norm();
    const double n = static_cast<double>(done);
    const double pa = static_cast<double>(n11 + n10) / n;
    const double pb = static_cast<double>(n11 + n01) / n;
    const double pab = static_cast<double>(n11) / n;
    const double cov = pab - pa * pb;

    // Plug-in variance of the sample covariance of two indicators.
    auto sq = [](double v) { return v * v; };
    const double p00 = 1.0 - pa - pb + pab;
    const double m22 = pab * sq((1.0 - pa) * (1.0 - pb)) +
                       (pa - pab) * sq((1.0 - pa) * pb) + (pb - pab) * sq(pa * (1.0 - pb)) +
                       p00 * sq(pa * pb);
    const double var = std::max(0.0, m22 - cov * cov);

    MixingEstimate out;
    out.event = event.name;
    out.m = m;
    out.x_norm = x_norm;
    out.replicates = done;
    out.covariance = cov;
    out.stderr_ = std::sqrt(var / n);
    out.p_joint = pab;
    out.p_a = pa;
    out.p_b = pb;
    return out;
}

MixingFit fit_mixing_exponent(const std::vector<MixingEstimate>& estimates) {
    MixingFit out;
    std::vector<std::pair<double, double>> points;
    for (const auto& e : estimates) {
        if (std::abs(e.covariance) > 3.0 * e.stderr_)
            points.emplace_back(e.m, std::abs(e.covariance));
    }
    out.significant_scales = points.size();
    if (points.size() < 3) return out;
    out.fit = fit_exponent(points);
    out.reliable = true;
    return out;
}

}  // namespace chemdist
