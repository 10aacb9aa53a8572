#include "chemdist/graph_core.hpp"

#include <algorithm>
#include <cmath>

#include "chemdist/rng.hpp"

namespace chemdist {

std::vector<Hops> distances_from(const SpatialGraph& graph, std::uint32_t source) {
    if (source >= graph.size()) throw UsageError("distances_from: invalid vertex id");
    std::vector<Hops> dist(graph.size(), kUnreachable);
    std::vector<std::uint32_t> frontier{source}, next;
    dist[source] = 0;
    Hops level = 0;
    while (!frontier.empty()) {
        ++level;
        next.clear();
        for (std::uint32_t v : frontier) {
            for (std::uint32_t w : graph.adj[v]) {
                if (dist[w] == kUnreachable) {
                    dist[w] = level;
                    next.push_back(w);
                }
            }
        }
        frontier.swap(next);
    }
    return dist;
}

Hops chemical_distance(const SpatialGraph& graph, std::uint32_t source, std::uint32_t target) {
    if (source >= graph.size() || target >= graph.size())
        throw UsageError("chemical_distance: invalid vertex id");
    if (source == target) return 0;
    std::vector<Hops> dist(graph.size(), kUnreachable);
    std::vector<std::uint32_t> frontier{source}, next;
    dist[source] = 0;
    Hops level = 0;
    while (!frontier.empty()) {
        ++level;
        next.clear();
        for (std::uint32_t v : frontier) {
            for (std::uint32_t w : graph.adj[v]) {
                if (dist[w] == kUnreachable) {
                    if (w == target) return level;
                    dist[w] = level;
                    next.push_back(w);
                }
            }
        }
        frontier.swap(next);
    }
    return kUnreachable;
}

void DistanceEventSpec::validate() const {
    if (!(inner_side > 0.0) || !(outer_side > inner_side))
        throw ParameterError("D event: need 0 < L < m");
    if (!(eta > 0.0)) throw ParameterError("D event: eta must be positive");
}

DEventResult check_D_event(const SpatialGraph& graph, const DistanceEventSpec& spec) {
    spec.validate();
    const Window& w = graph.cloud.window;
    if (w.side < spec.outer_side)
        throw UsageError("check_D_event: measurement window smaller than the outer box");

    const Box inner{w.center, spec.inner_side};
    const Box outer{w.center, spec.outer_side};
    const Box measured = w.measurement_box();

    std::vector<std::uint32_t> inner_ids, far_ids;
    for (std::uint32_t v = 0; v < graph.size(); ++v) {
        const auto loc = graph.cloud.location(v);
        if (inner.contains(loc)) inner_ids.push_back(v);
        else if (measured.contains(loc) && !outer.contains(loc)) far_ids.push_back(v);
    }

    for (std::uint32_t x : inner_ids) {
        const auto dist = distances_from(graph, x);
        for (std::uint32_t y : far_ids) {
            if (dist[y] == kUnreachable) continue;  // infinity beats any bound
            const double euclid = distance(graph.cloud.location(x), graph.cloud.location(y));
            if (static_cast<double>(dist[y]) < spec.eta * euclid) {
                return {false, DEventWitness{x, y, dist[y], euclid}};
            }
        }
    }
    return {true, std::nullopt};
}

std::vector<std::vector<double>> distance_ratio_samples(const SpatialGraph& graph,
                                                        const std::vector<double>& radii,
                                                        std::size_t samples, std::uint64_t seed) {
    for (double r : radii) {
        if (!(r > 0.0)) throw ParameterError("ratio profile: radii must be positive");
        if (1.1 * r > graph.cloud.window.side * std::sqrt(static_cast<double>(graph.cloud.dim())))
            throw UsageError("ratio profile: radius beyond the measurement window");
    }
    std::vector<std::vector<double>> out(radii.size());
    if (graph.size() == 0 || samples == 0) return out;

    // Deterministic source order: seeded shuffle of all vertices.
    std::vector<std::uint32_t> order(graph.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Stream shuffle_stream(rng::key_of({seed, 0x5157ull}));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_stream.next_below(i)]);

    std::size_t pending = radii.size();
    for (std::uint32_t src : order) {
        if (pending == 0) break;
        const auto dist = distances_from(graph, src);
        const auto src_loc = graph.cloud.location(src);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            auto& bucket = out[k];
            if (bucket.size() >= samples) continue;
            for (std::uint32_t v = 0; v < graph.size() && bucket.size() < samples; ++v) {
                if (v == src || dist[v] == kUnreachable) continue;
                const double euclid = distance(src_loc, graph.cloud.location(v));
                if (euclid >= radii[k] && euclid <= 1.1 * radii[k])
                    bucket.push_back(static_cast<double>(dist[v]) / euclid);
            }
            if (bucket.size() >= samples) --pending;
        }
    }
    return out;
}

std::vector<ProfileRow> distance_ratio_profile(const SpatialGraph& graph,
                                               const std::vector<double>& radii,
                                               std::size_t samples, std::uint64_t seed) {
    const auto buckets = distance_ratio_samples(graph, radii, samples, seed);
    std::vector<ProfileRow> rows(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        rows[k].radius = radii[k];
        rows[k].count = buckets[k].size();
        if (!buckets[k].empty()) rows[k].ratio = quartiles(buckets[k]);
    }
    return rows;
}

}  // namespace chemdist
