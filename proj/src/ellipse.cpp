#include "chemdist/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chemdist {

namespace {

constexpr double kDiscriminantTie = 1e-12;

struct Mat3 {
    // Symmetric, stored dense for the determinant expansions.
    double m[3][3];
};

Mat3 conic(const Ellipse& e) {
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    const double ia = 1.0 / (e.major * e.major), ib = 1.0 / (e.minor * e.minor);
    const double q11 = c * c * ia + s * s * ib;
    const double q22 = s * s * ia + c * c * ib;
    const double q12 = c * s * (ia - ib);
    const double l1 = -(q11 * e.cx + q12 * e.cy);
    const double l2 = -(q12 * e.cx + q22 * e.cy);
    const double m33 = q11 * e.cx * e.cx + 2.0 * q12 * e.cx * e.cy + q22 * e.cy * e.cy - 1.0;
    return Mat3{{{q11, q12, l1}, {q12, q22, l2}, {l1, l2, m33}}};
}

double det3(const double* c0, const double* c1, const double* c2) {
    return c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) -
           c1[0] * (c0[1] * c2[2] - c0[2] * c2[1]) +
           c2[0] * (c0[1] * c1[2] - c0[2] * c1[1]);
}

}  // namespace

std::array<double, 6> conic_matrix(const Ellipse& e) {
    Mat3 a = conic(e);
    return {a.m[0][0], a.m[0][1], a.m[1][1], a.m[0][2], a.m[1][2], a.m[2][2]};
}

bool ellipses_intersect(const Ellipse& a, const Ellipse& b) {
    const double dx = a.cx - b.cx, dy = a.cy - b.cy;
    const double d2 = dx * dx + dy * dy;
    const double reach = a.major + b.major;
    if (d2 > reach * reach) return false;
    const double inner = a.minor + b.minor;
    if (d2 <= inner * inner) return true;

    // Columns of the two conic matrices.
    Mat3 ma = conic(a), mb = conic(b);
    double ca[3][3], cb[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ca[j][i] = ma.m[i][j];
            cb[j][i] = mb.m[i][j];
        }

    // det(lambda*A + B) = c3 l^3 + c2 l^2 + c1 l + c0 via column mixing.
    const double c3 = det3(ca[0], ca[1], ca[2]);
    const double c2 = det3(cb[0], ca[1], ca[2]) + det3(ca[0], cb[1], ca[2]) +
                      det3(ca[0], ca[1], cb[2]);
    const double c1 = det3(ca[0], cb[1], cb[2]) + det3(cb[0], ca[1], cb[2]) +
                      det3(cb[0], cb[1], ca[2]);
    const double c0 = det3(cb[0], cb[1], cb[2]);

    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    const double a3 = c3 / scale, a2 = c2 / scale, a1 = c1 / scale, a0 = c0 / scale;

    const double disc = 18.0 * a3 * a2 * a1 * a0 - 4.0 * a2 * a2 * a2 * a0 +
                        a2 * a2 * a1 * a1 - 4.0 * a3 * a1 * a1 * a1 -
                        27.0 * a3 * a3 * a0 * a0;

    // No three distinct real roots (or a near-tie): the grains meet.
    if (disc <= kDiscriminantTie) return true;

    // Three distinct real roots of the monic cubic, by the trigonometric method.
    const double p = a2 / a3, q = a1 / a3, r = a0 / a3;
    const double sh = p / 3.0;
    const double big_p = q - p * p / 3.0;
    const double big_q = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    const double mfac = 2.0 * std::sqrt(std::max(0.0, -big_p / 3.0));
    double arg = 0.0;
    if (mfac > 0.0) arg = std::clamp(3.0 * big_q / (big_p * mfac), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;

    double roots[3];
    for (int k = 0; k < 3; ++k)
        roots[k] = mfac * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - sh;
    std::sort(roots, roots + 3);

    // Disjoint grains give two distinct positive roots.
    const bool separated = roots[1] > 0.0;
    return !separated;
}

}  // namespace chemdist
