#ifndef CHEMDIST_ELLIPSE_HPP
#define CHEMDIST_ELLIPSE_HPP

#include <array>

namespace chemdist {

// Closed elliptical grain in the plane.
struct Ellipse {
    double cx = 0.0, cy = 0.0;
    double major = 1.0;  // semi-axis along the orientation
    double minor = 1.0;
    double angle = 0.0;  // radians in [0, pi)
};

// 3x3 symmetric conic matrix of the ellipse boundary, normalised so that
// interior points give X^T M X < 0 for X = (x, y, 1).
std::array<double, 6> conic_matrix(const Ellipse& e);  // m11,m12,m22,m13,m23,m33

// Exact overlap predicate for closed grains: bounding-circle rejection and
// inner-circle acceptance first, then the sign test on the characteristic
// cubic det(lambda*A + B). The two grains are disjoint exactly when the
// cubic has two distinct positive roots; discriminant ties below 1e-12
// (after normalisation) count as intersecting.
bool ellipses_intersect(const Ellipse& a, const Ellipse& b);

}  // namespace chemdist

#endif
