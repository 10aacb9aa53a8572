#include "chemdist/point_process.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "chemdist/errors.hpp"

namespace chemdist {

namespace {

// Stream tags; fixed constants so every draw has a stable key.
enum Purpose : std::uint64_t {
    kCountStream = 0x01,
    kCoordDraw = 0x02,
    kMarkDraw = 0x03,
    kOrientationDraw = 0x04,
    kSiteRetention = 0x05,
};

std::uint64_t point_identity(std::span<const double> loc, double mark) {
    std::uint64_t h = 0x5851F42D4C957F2Dull;
    for (double c : loc) h = rng::absorb(h, rng::bits_of(c));
    return rng::absorb(h, rng::bits_of(mark));
}

}  // namespace

namespace poisson_draws {

std::uint64_t count(const Window& window, double intensity, std::uint64_t seed) {
    if (!(intensity > 0.0) || !std::isfinite(intensity))
        throw ParameterError("sample_poisson: intensity must be positive");
    const double expected = intensity * window.padded_volume();
    if (expected > 1e8)
        throw ResourceError("sample_poisson: expected point count exceeds 1e8");
    rng::Stream count_stream(rng::key_of({seed, kCountStream}));
    return rng::poisson(count_stream, expected);
}

double coord(const Window& window, std::uint64_t seed, std::uint64_t i, int axis) {
    const double s = window.padded_side();
    const double u =
        rng::keyed_unit(rng::key_of({seed, kCoordDraw, i, static_cast<std::uint64_t>(axis)}));
    return window.center[axis] - s / 2.0 + u * s;
}

double mark(std::uint64_t seed, std::uint64_t i) {
    return rng::keyed_unit_open(rng::key_of({seed, kMarkDraw, i}));
}

double orientation(std::uint64_t seed, std::uint64_t i) {
    return std::numbers::pi * rng::keyed_unit(rng::key_of({seed, kOrientationDraw, i}));
}

}  // namespace poisson_draws

MarkedPointCloud sample_poisson(const Window& window, double intensity, std::uint64_t seed,
                                bool with_orientations) {
    MarkedPointCloud cloud;
    cloud.window = window;
    cloud.seed = seed;

    const std::uint64_t n = poisson_draws::count(window, intensity, seed);

    const int d = window.dim;
    cloud.coords.resize(n * static_cast<std::size_t>(d));
    cloud.marks.resize(n);
    cloud.keys.resize(n);
    if (with_orientations) cloud.orientations.resize(n);

    for (std::uint64_t i = 0; i < n; ++i) {
        double* p = cloud.coords.data() + i * static_cast<std::size_t>(d);
        for (int a = 0; a < d; ++a) p[a] = poisson_draws::coord(window, seed, i, a);
        cloud.marks[i] = poisson_draws::mark(seed, i);
        if (with_orientations) cloud.orientations[i] = poisson_draws::orientation(seed, i);
        cloud.keys[i] = point_identity({p, static_cast<std::size_t>(d)}, cloud.marks[i]);
    }
    return cloud;
}

MarkedPointCloud sample_site_lattice(const Window& window, double retention, std::uint64_t seed,
                                     bool with_orientations) {
    if (!(retention > 0.0) || retention > 1.0)
        throw ParameterError("sample_site_lattice: retention must lie in (0,1]");

    const int d = window.dim;
    const double s = window.padded_side();

    // Integer sites in the half-open padded box, lexicographic order.
    std::vector<std::int64_t> lo(d), hi(d), at(d);
    double total = 1.0;
    for (int a = 0; a < d; ++a) {
        lo[a] = static_cast<std::int64_t>(std::ceil(window.center[a] - s / 2.0));
        // Half-open: include z with z < center + s/2.
        double upper = window.center[a] + s / 2.0;
        std::int64_t h = static_cast<std::int64_t>(std::floor(upper));
        if (static_cast<double>(h) == upper) --h;
        hi[a] = h;
        if (hi[a] < lo[a]) total = 0.0;
        else total *= static_cast<double>(hi[a] - lo[a] + 1);
        at[a] = lo[a];
    }
    if (total > 1e8) throw ResourceError("sample_site_lattice: site count exceeds 1e8");

    MarkedPointCloud cloud;
    cloud.window = window;
    cloud.seed = seed;
    cloud.lattice = true;
    if (total == 0.0) return cloud;

    for (;;) {
        std::uint64_t site_key = 0x8CB92BA72F3D8DD7ull;
        for (int a = 0; a < d; ++a)
            site_key = rng::absorb(site_key, static_cast<std::uint64_t>(at[a]));

        const bool keep =
            retention >= 1.0 ||
            rng::keyed_unit(rng::key_of({seed, kSiteRetention, site_key})) < retention;
        if (keep) {
            for (int a = 0; a < d; ++a) cloud.coords.push_back(static_cast<double>(at[a]));
            cloud.marks.push_back(rng::keyed_unit_open(rng::key_of({seed, kMarkDraw, site_key})));
            if (with_orientations)
                cloud.orientations.push_back(
                    std::numbers::pi * rng::keyed_unit(rng::key_of({seed, kOrientationDraw, site_key})));
            const std::size_t i = cloud.marks.size() - 1;
            cloud.keys.push_back(point_identity(cloud.location(i), cloud.marks[i]));
        }
        int a = d - 1;  // row-major: last axis fastest
        while (a >= 0 && ++at[a] > hi[a]) { at[a] = lo[a]; --a; }
        if (a < 0) break;
    }
    return cloud;
}

void assign_point_keys(MarkedPointCloud& cloud) {
    cloud.keys.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        cloud.keys[i] = point_identity(cloud.location(i), cloud.marks[i]);
}

GridIndex::GridIndex(const MarkedPointCloud& cloud, double cell_size)
    : cloud_(cloud), dim_(cloud.dim()), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw ParameterError("grid index: cell size must be positive");
    const double s = cloud.window.padded_side();
    origin_.resize(dim_);
    counts_.resize(dim_);
    std::size_t total = 1;
    for (int a = 0; a < dim_; ++a) {
        origin_[a] = cloud.window.center[a] - s / 2.0;
        counts_[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(s / cell_)));
        total *= static_cast<std::size_t>(counts_[a]);
    }
    cells_.resize(total);
    std::vector<std::int64_t> at(dim_);
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.location(i);
        for (int a = 0; a < dim_; ++a) at[a] = clamp_cell(cell_coord(p[a], a), a);
        cells_[flat_index(at)].push_back(i);
    }
}

std::int64_t GridIndex::cell_coord(double x, int axis) const {
    return static_cast<std::int64_t>(std::floor((x - origin_[axis]) / cell_));
}

std::int64_t GridIndex::clamp_cell(std::int64_t c, int axis) const {
    if (c < 0) return 0;
    if (c >= counts_[axis]) return counts_[axis] - 1;
    return c;
}

std::size_t GridIndex::flat_index(std::span<const std::int64_t> at) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a)
        idx = idx * static_cast<std::size_t>(counts_[a]) + static_cast<std::size_t>(at[a]);
    return idx;
}

std::size_t GridIndex::count_within(std::span<const double> center, double radius_sq) const {
    std::size_t n = 0;
    for_candidates(center, std::sqrt(radius_sq), [&](std::uint32_t j) {
        if (squared_distance(center, cloud_.location(j)) < radius_sq) ++n;
    });
    return n;
}

void write_vertex_csv(std::ostream& out, const MarkedPointCloud& cloud) {
    out << "id";
    for (int a = 1; a <= cloud.dim(); ++a) out << ",x" << a;
    out << ",mark";
    if (cloud.has_orientations()) out << ",orientation";
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << i;
        auto p = cloud.location(i);
        for (int a = 0; a < cloud.dim(); ++a) {
            std::snprintf(buf, sizeof buf, ",%.17g", p[a]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", cloud.marks[i]);
        out << buf;
        if (cloud.has_orientations()) {
            std::snprintf(buf, sizeof buf, ",%.17g", cloud.orientations[i]);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace chemdist
