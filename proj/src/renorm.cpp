#include "chemdist/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace chemdist {

std::int64_t scale(std::int64_t K, int n) {
    if (K <= 0 || K % 2 != 0) throw ParameterError("scale: K must be even and positive");
    if (n < 0) throw ParameterError("scale: stage must be >= 0");
    __int128 v = K;
    for (int h = 2; h <= n; ++h) {
        v *= static_cast<__int128>(h) * h;
        if (v > (static_cast<__int128>(1) << 62)) throw ResourceError("scale: K_n exceeds 2^62");
    }
    return static_cast<std::int64_t>(v);
}

ScaleLadder::ScaleLadder(std::int64_t K_, int max_stage_) : K(K_), max_stage(max_stage_) {
    if (max_stage < 0) throw ParameterError("ladder: max_stage must be >= 0");
    sizes.reserve(static_cast<std::size_t>(max_stage) + 1);
    for (int n = 0; n <= max_stage; ++n) sizes.push_back(scale(K, n));
}

double ScaleLadder::required_margin(int stage) const {
    double margin = 0.0;
    for (int n = stage; n >= 1; --n)
        margin += static_cast<double>(size(n - 1)) / 2.0;
    return margin;
}

namespace {

struct LongEdge {
    double length;
    std::uint32_t a, b;
};

// Edges longer than the ladder's smallest threshold, indexed by midpoint on
// a coarse grid. An edge internal to a convex box has its midpoint inside,
// so box queries only touch overlapping cells.
struct LongEdgeIndex {
    std::vector<LongEdge> edges;
    std::vector<std::vector<std::uint32_t>> cells;
    double cell = 1.0;
    Vec origin;
    std::vector<std::int64_t> counts;
    int dim = 0;

    LongEdgeIndex(const SpatialGraph& graph, double min_threshold, double cell_hint) {
        dim = graph.cloud.dim();
        cell = std::max(cell_hint, 1e-9);
        const Window& w = graph.cloud.window;
        origin.resize(dim);
        counts.resize(dim);
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) {
            origin[a] = w.center[a] - w.padded_side() / 2.0;
            counts[a] = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::ceil(w.padded_side() / cell)));
            total *= static_cast<std::size_t>(counts[a]);
        }
        cells.resize(total);
        graph.for_each_edge([&](std::uint32_t a, std::uint32_t b) {
            const auto pa = graph.cloud.location(a);
            const auto pb = graph.cloud.location(b);
            const double len = distance(pa, pb);
            if (len <= min_threshold) return;
            const auto id = static_cast<std::uint32_t>(edges.size());
            edges.push_back({len, a, b});
            std::size_t idx = 0;
            for (int ax = 0; ax < dim; ++ax) {
                auto c = static_cast<std::int64_t>(
                    std::floor(((pa[ax] + pb[ax]) / 2.0 - origin[ax]) / cell));
                c = std::clamp<std::int64_t>(c, 0, counts[ax] - 1);
                idx = idx * static_cast<std::size_t>(counts[ax]) + static_cast<std::size_t>(c);
            }
            cells[idx].push_back(id);
        });
    }

    template <typename Fn>
    void for_box(const Box& box, Fn&& fn) const {
        std::vector<std::int64_t> lo(dim), hi(dim), at(dim);
        for (int a = 0; a < dim; ++a) {
            lo[a] = std::clamp<std::int64_t>(
                static_cast<std::int64_t>(std::floor((box.lo(a) - origin[a]) / cell)), 0,
                counts[a] - 1);
            hi[a] = std::clamp<std::int64_t>(
                static_cast<std::int64_t>(std::floor((box.hi(a) - origin[a]) / cell)), 0,
                counts[a] - 1);
            at[a] = lo[a];
        }
        for (;;) {
            std::size_t idx = 0;
            for (int a = 0; a < dim; ++a)
                idx = idx * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(at[a]);
            for (std::uint32_t id : cells[idx])
                if (fn(edges[id])) return;
            int a = 0;
            while (a < dim && ++at[a] > hi[a]) { at[a] = lo[a]; ++a; }
            if (a == dim) break;
        }
    }
};

struct Classifier {
    const SpatialGraph& graph;
    const ScaleLadder& ladder;
    LongEdgeIndex index;
    std::unordered_map<std::uint64_t, BoxVerdict> memo;

    Classifier(const SpatialGraph& g, const ScaleLadder& l)
        : graph(g), ladder(l),
          index(g, l.threshold(0), static_cast<double>(l.K)) {}

    static std::uint64_t memo_key(const Vec& center, int stage) {
        std::uint64_t h = rng::absorb(0x9E3779B97F4A7C15ull, static_cast<std::uint64_t>(stage));
        for (double c : center) h = rng::absorb(h, rng::bits_of(c));
        return h;
    }

    // First internal edge longer than the threshold, if any.
    std::optional<LongEdge> long_internal_edge(const Box& box, double threshold) const {
        std::optional<LongEdge> found;
        index.for_box(box, [&](const LongEdge& e) {
            if (e.length <= threshold) return false;
            if (box.contains(graph.cloud.location(e.a)) &&
                box.contains(graph.cloud.location(e.b))) {
                found = e;
                return true;
            }
            return false;
        });
        return found;
    }

    BoxVerdict classify(const Vec& center, int stage) {
        const std::uint64_t key = memo_key(center, stage);
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        BoxVerdict verdict;
        verdict.stage = stage;
        verdict.center = center;
        const double threshold = ladder.threshold(stage);
        const int d = graph.cloud.dim();

        if (stage == 0) {
            const Box box{center, static_cast<double>(ladder.size(0))};
            if (auto e = long_internal_edge(box, threshold)) {
                verdict.good = false;
                verdict.failure =
                    BoxFailure{BoxFailure::Kind::LongEdge, e->a, e->b, e->length, threshold, {}, 0};
            }
            memo.emplace(key, verdict);
            return verdict;
        }

        const double side = static_cast<double>(ladder.size(stage));
        const double prev = static_cast<double>(ladder.size(stage - 1));
        const auto per_axis = static_cast<std::int64_t>(
            ladder.size(stage) / ladder.size(stage - 1));  // n^2 exactly
        const int max_bad = static_cast<int>(std::llround(std::pow(3.0, d)));

        // Walk the 3^d shift family.
        std::vector<int> shift(d, -1);
        for (;;) {
            Vec shifted(center);
            for (int a = 0; a < d; ++a) shifted[a] += prev / 2.0 * shift[a];
            const Box box{shifted, side};

            if (auto e = long_internal_edge(box, threshold)) {
                verdict.good = false;
                verdict.failure =
                    BoxFailure{BoxFailure::Kind::LongEdge, e->a, e->b, e->length, threshold, {}, 0};
                break;
            }

            // Stage-(n-1) boxes tiling the shifted box from its lower corner.
            int bad = 0;
            std::vector<std::int64_t> at(d, 0);
            for (;;) {
                Vec sub(d);
                for (int a = 0; a < d; ++a)
                    sub[a] = box.lo(a) + prev * (static_cast<double>(at[a]) + 0.5);
                if (!classify(sub, stage - 1).good) {
                    ++bad;
                    if (bad > max_bad) break;
                }
                int a = 0;
                while (a < d && ++at[a] >= per_axis) { at[a] = 0; ++a; }
                if (a == d) break;
            }
            if (bad > max_bad) {
                verdict.good = false;
                verdict.failure = BoxFailure{BoxFailure::Kind::TooManyBad, 0, 0, 0.0, 0.0,
                                             shift, bad};
                break;
            }

            int a = 0;
            while (a < d && ++shift[a] > 1) { shift[a] = -1; ++a; }
            if (a == d) break;
        }

        memo.emplace(key, verdict);
        return verdict;
    }
};

}  // namespace

BoxVerdict classify_box(const SpatialGraph& graph, const Vec& center, int stage,
                        const ScaleLadder& ladder) {
    if (stage < 0 || stage > ladder.max_stage)
        throw UsageError("classify_box: stage outside the ladder");
    if (static_cast<int>(center.size()) != graph.cloud.dim())
        throw UsageError("classify_box: center dimension mismatch");

    const double reach = static_cast<double>(ladder.size(stage)) / 2.0 +
                         ladder.required_margin(stage);
    const Box measured = graph.cloud.window.measurement_box();
    for (int a = 0; a < graph.cloud.dim(); ++a) {
        if (center[a] - reach < measured.lo(a) || center[a] + reach > measured.hi(a))
            throw UsageError("classify_box: shift family exits the measurement window");
    }

    Classifier classifier(graph, ladder);
    return classifier.classify(center, stage);
}

PsiEstimate estimate_psi(const ModelSpec& model, const ScaleLadder& ladder, int stage,
                         std::uint64_t replicates, std::uint64_t seed) {
    if (replicates == 0) throw ParameterError("estimate_psi: zero replicates");
    const double side =
        static_cast<double>(ladder.size(stage)) + 2.0 * ladder.required_margin(stage) + 2.0;
    const double pad = model.pair_independent() ? std::max(0.0, model.pad) : model.resolved_pad();
    const Window window(model.dim, side, pad);

    PsiEstimate out;
    out.K = ladder.K;
    out.stage = stage;
    out.replicates = replicates;
    const Vec origin(model.dim, 0.0);
    for (std::uint64_t r = 0; r < replicates; ++r) {
        const SpatialGraph graph = build_graph(model, window, replicate_seed(seed, r));
        if (!classify_box(graph, origin, stage, ladder).good) ++out.bad_count;
    }
    out.estimate = static_cast<double>(out.bad_count) / static_cast<double>(replicates);
    out.ci = wilson_interval(out.bad_count, replicates);
    return out;
}

double psi_bound(int n, double xi, double mu, int d, double c) {
    if (n < 1) throw ParameterError("psi_bound: n must be >= 1");
    if (!(xi < 0.0)) throw ParameterError("psi_bound: xi must be negative");
    if (!(mu < -static_cast<double>(d))) throw ParameterError("psi_bound: mu must be < -d");
    const double dmu = static_cast<double>(d) + mu;
    const double alpha = std::abs(std::max(xi, dmu));
    const double c_floor = 4.0 * (static_cast<double>(d) + std::abs(std::min(xi, dmu)));
    if (!(c > c_floor)) throw ParameterError("psi_bound: c below its admissible threshold");
    const double exponent = -2.0 * alpha + c / static_cast<double>(n);
    return std::exp(exponent * std::lgamma(static_cast<double>(n) + 2.0));
}

double renorm_product(int N, int n) {
    if (N < 1 || n < N) throw ParameterError("renorm_product: need n >= N >= 1");
    double prod = 1.0;
    for (int h = N; h <= n; ++h)
        prod *= 1.0 - static_cast<double>(N) / (static_cast<double>(h) * h);
    return prod;
}

void write_verdict_csv(std::ostream& out, const std::vector<BoxVerdict>& verdicts) {
    out << "stage,center,good,failure_kind,detail\n";
    for (const auto& v : verdicts) {
        std::ostringstream center, detail;
        for (std::size_t a = 0; a < v.center.size(); ++a) {
            if (a) center << ' ';
            center << v.center[a];
        }
        std::string kind = "none";
        if (v.failure) {
            if (v.failure->kind == BoxFailure::Kind::LongEdge) {
                kind = "long_edge";
                detail << "edge " << v.failure->edge_a << "-" << v.failure->edge_b << " length "
                       << v.failure->length << " > " << v.failure->threshold;
            } else {
                kind = "too_many_bad";
                detail << v.failure->bad_count << " bad sub-boxes in shift";
                for (int j : v.failure->shift) detail << ' ' << j;
            }
        }
        out << v.stage << "," << center.str() << "," << (v.good ? 1 : 0) << "," << kind << ","
            << detail.str() << "\n";
    }
}

PathDecomposition decompose_path(const SpatialGraph& graph,
                                 const std::vector<std::uint32_t>& path,
                                 const std::vector<Box>& bad_boxes) {
    if (path.empty()) throw UsageError("decompose_path: empty path");
    const int d = graph.cloud.dim();
    const auto slots = static_cast<std::size_t>(std::llround(std::pow(9.0, d)));
    if (bad_boxes.size() > slots)
        throw UsageError("decompose_path: more bad boxes than the good-box hypothesis allows");
    for (std::uint32_t v : path)
        if (v >= graph.size()) throw UsageError("decompose_path: invalid vertex id");
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (!graph.has_edge(path[i], path[i + 1]))
            throw UsageError("decompose_path: not a walk in the graph");

    // Smallest-index bad box containing a vertex (fixed decision rule).
    auto box_of = [&](std::uint32_t v) -> int {
        const auto loc = graph.cloud.location(v);
        for (std::size_t q = 0; q < bad_boxes.size(); ++q)
            if (bad_boxes[q].contains(loc)) return static_cast<int>(q);
        return -1;
    };

    const std::size_t last = path.size() - 1;
    PathDecomposition out;
    std::size_t from = 0;  // k_{s-1} + 1
    for (;;) {
        // i_s: first vertex at or past `from` inside the bad region.
        std::size_t i_s = from;
        int j_s = -1;
        while (i_s <= last && (j_s = box_of(path[i_s])) < 0) ++i_s;
        if (i_s > last) {
            out.good_segments.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(from),
                                           path.end());
            break;
        }
        // k_s: last visit to that box.
        std::size_t k_s = i_s;
        for (std::size_t i = i_s; i <= last; ++i)
            if (bad_boxes[static_cast<std::size_t>(j_s)].contains(graph.cloud.location(path[i])))
                k_s = i;

        out.good_segments.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(from),
                                       path.begin() + static_cast<std::ptrdiff_t>(i_s));
        // The bad segment picks up at the junction vertex: one before the
        // first bad-region visit, except when the preceding good segment is
        // empty, where it starts at the previous segment's final vertex.
        const std::size_t bad_from = i_s > from ? i_s - 1 : from;
        const std::size_t bad_to = std::min(k_s + 1, last);
        out.bad_segments.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(bad_from),
                                      path.begin() + static_cast<std::ptrdiff_t>(bad_to) + 1);
        if (k_s >= last) {
            out.good_segments.emplace_back();
            break;
        }
        from = k_s + 1;
        if (out.bad_segments.size() > slots)
            throw UsageError("decompose_path: decomposition exceeds 9^d segments");
    }

    out.good_segments.resize(slots);
    out.bad_segments.resize(slots);
    return out;
}

std::vector<std::size_t> greedy_waypoints(const std::vector<Vec>& segment, double K_prev) {
    if (segment.empty()) throw UsageError("greedy_waypoints: empty segment");
    if (!(K_prev > 0.0)) throw ParameterError("greedy_waypoints: scale must be positive");

    std::vector<std::size_t> w{0};
    const std::size_t last = segment.size() - 1;
    const double spacing = K_prev / 16.0;
    const double radius = K_prev / 2.0;

    std::size_t p = 0;
    while (p < last) {
        bool fits = true;
        for (std::size_t q = p + 1; q <= last; ++q) {
            if (distance(segment[q], segment[p]) >= radius) {
                fits = false;
                break;
            }
        }
        if (fits) {
            // Absorb an endpoint closer than the spacing bound; properties
            // (1) and (2) then hold for every emitted pair.
            if (distance(segment[last], segment[p]) > spacing) w.push_back(last);
            break;
        }
        std::size_t j = p + 1;
        while (j <= last && distance(segment[j], segment[p]) <= spacing) ++j;
        w.push_back(j);
        p = j;
    }
    return w;
}

}  // namespace chemdist
