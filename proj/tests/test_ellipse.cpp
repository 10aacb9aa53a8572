#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemdist/ellipse.hpp"
#include "chemdist/rng.hpp"

using namespace chemdist;

TEST_SUITE_BEGIN("ellipse");

namespace {

bool point_inside(const Ellipse& e, double x, double y) {
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    const double dx = x - e.cx, dy = y - e.cy;
    const double u = (c * dx + s * dy) / e.major;
    const double v = (-s * dx + c * dy) / e.minor;
    return u * u + v * v <= 1.0;
}

// Rasterised oracle: centre containment plus boundary sampling both ways.
bool oracle_intersect(const Ellipse& a, const Ellipse& b, int samples = 10000) {
    if (point_inside(a, b.cx, b.cy) || point_inside(b, a.cx, a.cy)) return true;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * std::numbers::pi * i / samples;
        const double ca = std::cos(a.angle), sa = std::sin(a.angle);
        const double px = a.cx + a.major * std::cos(t) * ca - a.minor * std::sin(t) * sa;
        const double py = a.cy + a.major * std::cos(t) * sa + a.minor * std::sin(t) * ca;
        if (point_inside(b, px, py)) return true;
        const double cb = std::cos(b.angle), sb = std::sin(b.angle);
        const double qx = b.cx + b.major * std::cos(t) * cb - b.minor * std::sin(t) * sb;
        const double qy = b.cy + b.major * std::cos(t) * sb + b.minor * std::sin(t) * cb;
        if (point_inside(a, qx, qy)) return true;
    }
    return false;
}

// How decisively the oracle saw the configuration: smallest |quadratic form
// residual| among sampled boundary points of one grain against the other.
double oracle_margin(const Ellipse& a, const Ellipse& b, int samples = 2000) {
    double margin = 1e300;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * std::numbers::pi * i / samples;
        const double ca = std::cos(a.angle), sa = std::sin(a.angle);
        const double px = a.cx + a.major * std::cos(t) * ca - a.minor * std::sin(t) * sa;
        const double py = a.cy + a.major * std::cos(t) * sa + a.minor * std::sin(t) * ca;
        const double cb = std::cos(b.angle), sb = std::sin(b.angle);
        const double dx = px - b.cx, dy = py - b.cy;
        const double u = (cb * dx + sb * dy) / b.major;
        const double v = (-sb * dx + cb * dy) / b.minor;
        margin = std::min(margin, std::abs(u * u + v * v - 1.0));
    }
    return margin;
}

}  // namespace

TEST_CASE("circles: separation, overlap, tangency") {
    const Ellipse a{0.0, 0.0, 1.0, 1.0, 0.0};
    CHECK_FALSE(ellipses_intersect(a, Ellipse{3.0, 0.0, 1.0, 1.0, 0.0}));
    CHECK(ellipses_intersect(a, Ellipse{1.9, 0.0, 1.0, 1.0, 0.0}));
    // Closed grains: external tangency counts as intersecting.
    CHECK(ellipses_intersect(a, Ellipse{2.0, 0.0, 1.0, 1.0, 0.0}));
    // Containment counts as intersecting.
    CHECK(ellipses_intersect(Ellipse{0.0, 0.0, 5.0, 5.0, 0.0}, a));
}

TEST_CASE("long grain against a unit disk") {
    const Ellipse grain{0.0, 0.0, 10.0, 1.0, 0.0};
    CHECK(ellipses_intersect(grain, Ellipse{10.5, 0.0, 1.0, 1.0, 0.0}));
    CHECK_FALSE(ellipses_intersect(grain, Ellipse{0.0, 2.5, 1.0, 1.0, 0.0}));
    // Rotating the grain by pi/2 swaps the two answers.
    const Ellipse rotated{0.0, 0.0, 10.0, 1.0, std::numbers::pi / 2.0};
    CHECK_FALSE(ellipses_intersect(rotated, Ellipse{10.5, 0.0, 1.0, 1.0, 0.0}));
    CHECK(ellipses_intersect(rotated, Ellipse{0.0, 2.5, 1.0, 1.0, 0.0}));
}

TEST_CASE("predicate agrees with the point-sampling oracle") {
    rng::Stream s(2718);
    int checked = 0;
    for (int it = 0; it < 1000; ++it) {
        const Ellipse a{8.0 * s.next_unit() - 4.0, 8.0 * s.next_unit() - 4.0,
                        1.0 + 6.0 * s.next_unit(), 1.0, std::numbers::pi * s.next_unit()};
        const Ellipse b{8.0 * s.next_unit() - 4.0, 8.0 * s.next_unit() - 4.0,
                        1.0 + 6.0 * s.next_unit(), 1.0, std::numbers::pi * s.next_unit()};
        const bool mine = ellipses_intersect(a, b);
        const bool via_oracle = oracle_intersect(a, b);
        if (mine != via_oracle) {
            // Disagreements may only happen essentially at tangency.
            CHECK(oracle_margin(a, b) < 1e-3);
        } else {
            ++checked;
        }
    }
    CHECK(checked >= 998);
}

TEST_SUITE_END();
