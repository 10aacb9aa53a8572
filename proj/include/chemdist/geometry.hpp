#ifndef CHEMDIST_GEOMETRY_HPP
#define CHEMDIST_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "chemdist/errors.hpp"

namespace chemdist {

using Vec = std::vector<double>;

// Axis-aligned half-open box: [center - side/2, center + side/2) per axis.
struct Box {
    Vec center;
    double side = 0.0;

    int dim() const { return static_cast<int>(center.size()); }

    bool contains(std::span<const double> p) const {
        const double h = side / 2.0;
        for (int a = 0; a < dim(); ++a) {
            const double d = p[a] - center[a];
            if (d < -h || d >= h) return false;
        }
        return true;
    }

    double lo(int axis) const { return center[axis] - side / 2.0; }
    double hi(int axis) const { return center[axis] + side / 2.0; }
};

// Finite observation window. Points are generated on the padded box; all
// downstream statistics are measured inside the unpadded one.
struct Window {
    int dim = 2;
    double side = 1.0;
    Vec center;  // defaults to the origin
    double pad = 0.0;

    Window() = default;
    Window(int dim_, double side_, double pad_ = 0.0, Vec center_ = {})
        : dim(dim_), side(side_), center(std::move(center_)), pad(pad_) {
        if (dim < 1) throw ParameterError("window: dim must be >= 1");
        if (!(side > 0.0)) throw ParameterError("window: side must be positive");
        if (!(pad >= 0.0)) throw ParameterError("window: pad must be nonnegative");
        if (center.empty()) center.assign(dim, 0.0);
        if (static_cast<int>(center.size()) != dim)
            throw ParameterError("window: center dimension mismatch");
    }

    double padded_side() const { return side + 2.0 * pad; }
    double padded_volume() const { return std::pow(padded_side(), dim); }
    double volume() const { return std::pow(side, dim); }

    Box measurement_box() const { return Box{center, side}; }
    Box padded_box() const { return Box{center, padded_side()}; }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

// Surface area of the unit sphere in R^d (2, 2*pi, 4*pi, ...).
inline double unit_sphere_area(int dim) {
    return static_cast<double>(dim) * std::pow(std::numbers::pi, dim / 2.0) /
           std::tgamma(dim / 2.0 + 1.0);
}

}  // namespace chemdist

#endif
