#include <doctest.h>

#include <cmath>
#include <sstream>

#include "brute_renorm.hpp"
#include "helpers.hpp"

using namespace chemdist;
using test::make_cloud;

TEST_SUITE_BEGIN("renorm");

TEST_CASE("factorial scales") {
    CHECK(scale(4, 0) == 4);
    CHECK(scale(4, 1) == 4);
    CHECK(scale(4, 2) == 16);
    CHECK(scale(4, 3) == 144);
    CHECK_THROWS_AS(scale(5, 1), ParameterError);
    CHECK_THROWS_AS(scale(-2, 1), ParameterError);
    CHECK_THROWS_AS(scale(4, 16), ResourceError);

    const ScaleLadder ladder(6, 5);
    for (int n = 1; n <= 5; ++n)
        CHECK(ladder.size(n) == static_cast<std::int64_t>(n) * n * ladder.size(n - 1));
}

TEST_CASE("empty graph is good at every stage") {
    const Window w(2, 40.0);
    const auto g = make_graph(make_cloud(w, {{3.0, 3.0}, {-5.0, 2.0}}), {});
    const ScaleLadder ladder(4, 2);
    for (int stage = 0; stage <= 2; ++stage) {
        const auto verdict = classify_box(g, {0.0, 0.0}, stage, ladder);
        CHECK(verdict.good);
        CHECK_FALSE(verdict.failure.has_value());
    }
}

TEST_CASE("one over-long internal edge fails condition (a)") {
    const Window w(2, 20.0);
    // K = 8: stage-1 threshold is K_0/100 = 0.08; the edge is K_0/50 long.
    const auto g = make_graph(make_cloud(w, {{-0.08, 0.0}, {0.08, 0.0}}), {{0, 1}});
    const ScaleLadder ladder(8, 1);
    const auto verdict = classify_box(g, {0.0, 0.0}, 1, ladder);
    CHECK_FALSE(verdict.good);
    REQUIRE(verdict.failure.has_value());
    CHECK(verdict.failure->kind == BoxFailure::Kind::LongEdge);
    CHECK(verdict.failure->length == doctest::Approx(0.16));
    CHECK(verdict.failure->threshold == doctest::Approx(0.08));

    // Ties at exactly the threshold stay good ("longer than" is strict).
    const auto tie = make_graph(make_cloud(w, {{-0.04, 0.0}, {0.04, 0.0}}), {{0, 1}});
    CHECK(classify_box(tie, {0.0, 0.0}, 1, ladder).good);
}

namespace {

// 3^d + 1 short edges, each turning exactly one stage-2 tile of every
// shifted stage-3 box bad; positions keep 4 units away from every tiling
// boundary (tile side 16, shifts 8).
SpatialGraph bad_subbox_instance(int edges) {
    const Window w(2, 176.0);
    std::vector<Vec> pts;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> es;
    int placed = 0;
    for (int i = 0; i < 4 && placed < edges; ++i) {
        for (int j = 0; j < 4 && placed < edges; ++j) {
            const double cx = 16.0 * i - 60.0 + 8.0;  // == 16 i - 52, i.e. 4 mod 8
            const double cy = 16.0 * j - 52.0;
            pts.push_back({cx - 0.04, cy});
            pts.push_back({cx + 0.04, cy});
            es.emplace_back(static_cast<std::uint32_t>(pts.size() - 2),
                            static_cast<std::uint32_t>(pts.size() - 1));
            ++placed;
        }
    }
    return make_graph(make_cloud(w, pts), es);
}

}  // namespace

TEST_CASE("sub-box counting: 3^d bad tiles pass, 3^d + 1 fail condition (b)") {
    const ScaleLadder ladder(4, 3);  // K_1 = 4, K_2 = 16, K_3 = 144

    const auto good_instance = bad_subbox_instance(9);
    const auto ok = classify_box(good_instance, {0.0, 0.0}, 3, ladder);
    CHECK(ok.good);

    const auto bad_instance = bad_subbox_instance(10);
    const auto bad = classify_box(bad_instance, {0.0, 0.0}, 3, ladder);
    CHECK_FALSE(bad.good);
    REQUIRE(bad.failure.has_value());
    CHECK(bad.failure->kind == BoxFailure::Kind::TooManyBad);
    CHECK(bad.failure->bad_count > 9);
}

TEST_CASE("window preconditions") {
    const Window w(2, 10.0);
    const auto g = make_graph(make_cloud(w, {{0.0, 0.0}}), {});
    const ScaleLadder ladder(8, 1);
    CHECK_THROWS_AS(classify_box(g, {0.0, 0.0}, 1, ladder), UsageError);
    CHECK_THROWS_AS(classify_box(g, {0.0}, 0, ladder), UsageError);
}

TEST_CASE("recursive classifier agrees with the brute-force definition") {
    const double amplitudes[] = {0.3, 2.0, 40.0, 400.0};
    ModelSpec spec;
    spec.kind = ModelKind::Wdrcm;
    spec.delta = 2.2;
    spec.pad = 0.0;
    int bad_seen = 0, good_seen = 0;
    for (int it = 0; it < 32; ++it) {
        spec.dim = it % 2 == 0 ? 2 : 1;
        spec.gamma = 0.1 + 0.04 * (it % 10);
        spec.amplitude = amplitudes[it % 4];
        const std::int64_t K = it % 3 == 0 ? 6 : 4;
        const int stage = it % 3;
        const ScaleLadder ladder(K, 2);
        const double side =
            static_cast<double>(ladder.size(stage)) + 2.0 * ladder.required_margin(stage) + 2.0;
        spec.window_side = side;
        const auto g = build_graph(spec, 4000 + static_cast<std::uint64_t>(it));
        const Vec center(spec.dim, 0.0);
        const auto verdict = classify_box(g, center, stage, ladder);
        CHECK(verdict.good == test::brute_good(g, center, stage, ladder));
        (verdict.good ? good_seen : bad_seen)++;
    }
    // The comparison must exercise both outcomes.
    CHECK(bad_seen > 3);
    CHECK(good_seen > 3);
}

TEST_CASE("adding edges can only turn good boxes bad") {
    ModelSpec spec;
    spec.kind = ModelKind::SoftBoolean;
    spec.dim = 2;
    spec.gamma = 0.2;
    spec.delta = 2.6;
    spec.pad = 0.0;
    const ScaleLadder ladder(4, 1);
    spec.window_side = 18.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = build_graph(spec, seed);
        if (g.size() < 2) continue;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        g.for_each_edge([&](std::uint32_t a, std::uint32_t b) { edges.emplace_back(a, b); });
        // Append the farthest pair as an extra edge.
        std::uint32_t best_a = 0, best_b = 1;
        double best = -1.0;
        for (std::uint32_t a = 0; a < g.size(); ++a)
            for (std::uint32_t b = a + 1; b < g.size(); ++b) {
                const double d2 = squared_distance(g.cloud.location(a), g.cloud.location(b));
                if (d2 > best) {
                    best = d2;
                    best_a = a;
                    best_b = b;
                }
            }
        edges.emplace_back(best_a, best_b);
        const auto denser = make_graph(g.cloud, edges);
        for (int stage = 0; stage <= 1; ++stage) {
            const Vec center(2, 0.0);
            if (!classify_box(g, center, stage, ladder).good)
                CHECK_FALSE(classify_box(denser, center, stage, ladder).good);
        }
    }
}

TEST_CASE("psi estimates: edgeless and bounded-reach models") {
    ModelSpec edgeless;
    edgeless.kind = ModelKind::Lrp;
    edgeless.dim = 2;
    edgeless.delta = 3.0;
    edgeless.amplitude = 0.0;
    edgeless.pad = 0.0;
    const ScaleLadder small(4, 1);
    CHECK(estimate_psi(edgeless, small, 1, 100, 5).estimate == 0.0);

    // Gilbert edges are at most 1 < K_0/100.
    ModelSpec gilbert;
    gilbert.kind = ModelKind::Gilbert;
    gilbert.dim = 2;
    gilbert.pad = 0.0;
    const ScaleLadder big(120, 0);
    const auto psi0 = estimate_psi(gilbert, big, 0, 50, 6);
    CHECK(psi0.estimate == 0.0);
    CHECK_THROWS_AS(estimate_psi(gilbert, big, 0, 0, 6), ParameterError);
}

TEST_CASE("boolean psi curve is nonincreasing at desk scale") {
    ModelSpec boolean;
    boolean.kind = ModelKind::Boolean;
    boolean.dim = 2;
    boolean.gamma = 0.5;
    boolean.pad = 0.0;
    const ScaleLadder ladder(60, 2);
    double prev = 1.1;
    for (int stage = 0; stage <= 2; ++stage) {
        const auto psi = estimate_psi(boolean, ladder, stage, 30, 7);
        CHECK(psi.estimate <= prev + 0.05);
        prev = psi.estimate;
    }
}

TEST_CASE("psi_bound arithmetic and preconditions") {
    CHECK(psi_bound(1, -1.0, -3.0, 2, 13.0) == doctest::Approx(2048.0));
    CHECK_THROWS_AS(psi_bound(1, -1.0, -3.0, 2, 11.9), ParameterError);
    CHECK_THROWS_AS(psi_bound(1, 0.5, -3.0, 2, 13.0), ParameterError);
    CHECK_THROWS_AS(psi_bound(1, -1.0, -1.5, 2, 13.0), ParameterError);
    CHECK_THROWS_AS(psi_bound(0, -1.0, -3.0, 2, 13.0), ParameterError);

    // Eventually decreasing to zero.
    double prev = psi_bound(10, -1.0, -3.0, 2, 13.0);
    for (int n = 11; n <= 40; ++n) {
        const double cur = psi_bound(n, -1.0, -3.0, 2, 13.0);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(prev < 1e-40);
}

TEST_CASE("psi_bound partial sums stay inside the factorial envelope") {
    const double xi = -1.0, mu = -3.0, c = 12.5;
    const int d = 2;
    const double alpha = std::abs(std::max(xi, d + mu));
    auto envelope = [&](int n) {
        return std::exp((-2.0 * alpha + c / n) * std::lgamma(n + 1.0));
    };
    auto tail_sum = [&](int n) {
        double s = 0.0;
        for (int k = std::max(1, n - 1); k < 400; ++k) {
            const double term = psi_bound(k, xi, mu, d, c);
            s += term;
            if (term < 1e-280 && k > n + 5) break;
        }
        return s;
    };
    // Calibrate the constant on [5, 12], then check it extrapolates to 20.
    double C = 0.0;
    for (int n = 5; n <= 12; ++n) C = std::max(C, tail_sum(n) / envelope(n));
    REQUIRE(C > 0.0);
    for (int n = 13; n <= 20; ++n) CHECK(tail_sum(n) <= C * envelope(n) * 1.0001);
}

TEST_CASE("renorm product helper") {
    CHECK(renorm_product(5, 5) == doctest::Approx(1.0 - 5.0 / 25.0));
    double prev = 1.0;
    for (int n = 90; n <= 120; n += 10) {
        const double p = renorm_product(90, n);
        CHECK(p > 0.0);
        CHECK(p <= prev);
        prev = p;
    }
    CHECK_THROWS_AS(renorm_product(3, 2), ParameterError);
}

TEST_CASE("path decomposition: disjoint, single crossing, re-entry") {
    const Window w(2, 60.0);
    std::vector<Vec> pts;
    for (int i = 0; i <= 10; ++i) pts.push_back({static_cast<double>(i) - 5.0, 0.0});
    const auto g = test::make_path_graph(w, pts);
    std::vector<std::uint32_t> path(11);
    for (std::uint32_t i = 0; i <= 10; ++i) path[i] = i;

    SUBCASE("no bad boxes: the whole path is one good segment") {
        const auto dec = decompose_path(g, path, {});
        CHECK(dec.good_segments.size() == 81);
        CHECK(dec.bad_segments.size() == 81);
        CHECK(dec.good_segments[0] == path);
        for (const auto& s : dec.bad_segments) CHECK(s.empty());
    }

    SUBCASE("one crossing splits into good, bad, good") {
        const Box q{{0.0, 0.0}, 2.0};  // covers x in [-1, 1): vertices 4 and 5
        const auto dec = decompose_path(g, path, {q});
        CHECK(dec.good_segments[0] == std::vector<std::uint32_t>{0, 1, 2, 3});
        CHECK(dec.bad_segments[0] == std::vector<std::uint32_t>{3, 4, 5, 6});
        CHECK(dec.good_segments[1] == std::vector<std::uint32_t>{6, 7, 8, 9, 10});
    }

    SUBCASE("re-entering the same box keeps one bad segment") {
        // Walk forward through the box, back, and forward again.
        std::vector<std::uint32_t> wander{0, 1, 2, 3, 4, 5, 4, 3, 4, 5, 6, 7, 8};
        const Box q{{0.0, 0.0}, 2.0};
        const auto dec = decompose_path(g, wander, {q});
        CHECK(dec.good_segments[0] == std::vector<std::uint32_t>{0, 1, 2, 3});
        // k_s is the LAST visit to the box (index 9 holds vertex 5).
        CHECK(dec.bad_segments[0] ==
              std::vector<std::uint32_t>{3, 4, 5, 4, 3, 4, 5, 6});
        CHECK(dec.good_segments[1] == std::vector<std::uint32_t>{6, 7, 8});
    }

    SUBCASE("too many bad boxes are rejected") {
        std::vector<Box> boxes(82, Box{{30.0, 30.0}, 0.5});
        CHECK_THROWS_AS(decompose_path(g, path, boxes), UsageError);
    }

    SUBCASE("not a walk is rejected") {
        CHECK_THROWS_AS(decompose_path(g, {0, 2}, {}), UsageError);
    }
}

TEST_CASE("verdict CSV carries stage, centre and failure detail") {
    const Window w(2, 20.0);
    const ScaleLadder ladder(8, 1);
    const auto bad = make_graph(make_cloud(w, {{-0.08, 0.0}, {0.08, 0.0}}), {{0, 1}});
    std::vector<BoxVerdict> verdicts{classify_box(bad, {0.0, 0.0}, 0, ladder),
                                     classify_box(bad, {0.0, 0.0}, 1, ladder)};
    std::ostringstream os;
    write_verdict_csv(os, verdicts);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "stage,center,good,failure_kind,detail");
    std::getline(is, line);
    CHECK(line.rfind("0,0 0,0,long_edge", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("1,0 0,0,long_edge", 0) == 0);
}

TEST_CASE("greedy waypoints: unit-step line and small-diameter segments") {
    const double K = 160.0;
    std::vector<Vec> line;
    for (int i = 0; i <= 200; ++i) line.push_back({static_cast<double>(i), 0.0});
    const auto w = greedy_waypoints(line, K);
    REQUIRE(w.size() >= 2);
    CHECK(w.front() == 0);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double gap = distance(line[w[i + 1]], line[w[i]]);
        CHECK(gap > K / 16.0);
        CHECK(gap <= K / 2.0);
        for (std::size_t q = w[i] + 1; q < w[i + 1]; ++q)
            CHECK(distance(line[q], line[w[i]]) < K / 2.0);
    }

    std::vector<Vec> short_line;
    for (int i = 0; i <= 30; ++i) short_line.push_back({static_cast<double>(i), 0.0});
    const auto w2 = greedy_waypoints(short_line, K);  // diameter 30 < K/2
    REQUIRE(w2.size() == 2);
    CHECK(w2[0] == 0);
    CHECK(w2[1] == 30);

    CHECK(greedy_waypoints({{1.0, 2.0}}, K) == std::vector<std::size_t>{0});
}

TEST_SUITE_END();
