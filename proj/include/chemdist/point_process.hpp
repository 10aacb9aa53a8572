#ifndef CHEMDIST_POINT_PROCESS_HPP
#define CHEMDIST_POINT_PROCESS_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "chemdist/geometry.hpp"
#include "chemdist/rng.hpp"

namespace chemdist {

// Vertex layer: locations in the padded window, i.i.d. uniform marks in
// (0,1) and, when requested, i.i.d. uniform orientations in [0,pi).
// Immutable after construction; safe to share across readers.
struct MarkedPointCloud {
    Window window;
    std::uint64_t seed = 0;
    bool lattice = false;

    std::vector<double> coords;        // size() == n * dim, point-major
    std::vector<double> marks;         // size() == n
    std::vector<double> orientations;  // empty or size() == n
    std::vector<std::uint64_t> keys;   // stable per-point identity keys

    int dim() const { return window.dim; }
    std::size_t size() const { return marks.size(); }
    bool has_orientations() const { return !orientations.empty(); }

    std::span<const double> location(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
};

// Homogeneous Poisson process of the given intensity on the padded window.
// Fully deterministic in (window, intensity, seed). Expected point counts
// above 1e8 are refused.
MarkedPointCloud sample_poisson(const Window& window, double intensity, std::uint64_t seed,
                                bool with_orientations = false);

// The individual keyed draws behind sample_poisson. Consumers that do not
// need full clouds (e.g. long-edge detection that first inspects marks) can
// evaluate exactly the draws they use; values agree with sample_poisson
// bit for bit.
namespace poisson_draws {
std::uint64_t count(const Window& window, double intensity, std::uint64_t seed);
double coord(const Window& window, std::uint64_t seed, std::uint64_t i, int axis);
double mark(std::uint64_t seed, std::uint64_t i);
double orientation(std::uint64_t seed, std::uint64_t i);
}  // namespace poisson_draws

// Bernoulli site percolation on Z^d intersected with the padded window.
MarkedPointCloud sample_site_lattice(const Window& window, double retention, std::uint64_t seed,
                                     bool with_orientations = false);

// Recomputes the per-point identity keys from locations and marks; needed
// after assembling a cloud by hand.
void assign_point_keys(MarkedPointCloud& cloud);

// Uniform-grid spatial index over a cloud, built per query radius.
class GridIndex {
  public:
    GridIndex(const MarkedPointCloud& cloud, double cell_size);

    // Visits candidate point indices in every cell intersecting the ball
    // around `center` of the given radius (callers re-check distances).
    template <typename Fn>
    void for_candidates(std::span<const double> center, double radius, Fn&& fn) const {
        const int d = dim_;
        std::vector<std::int64_t> lo(d), hi(d), at(d);
        for (int a = 0; a < d; ++a) {
            lo[a] = clamp_cell(cell_coord(center[a] - radius, a), a);
            hi[a] = clamp_cell(cell_coord(center[a] + radius, a), a);
            at[a] = lo[a];
        }
        for (;;) {
            for (std::uint32_t idx : cells_[flat_index(at)]) fn(idx);
            int a = 0;
            while (a < d && ++at[a] > hi[a]) { at[a] = lo[a]; ++a; }
            if (a == d) break;
        }
    }

    std::size_t count_within(std::span<const double> center, double radius_sq) const;

  private:
    std::int64_t cell_coord(double x, int axis) const;
    std::int64_t clamp_cell(std::int64_t c, int axis) const;
    std::size_t flat_index(std::span<const std::int64_t> at) const;

    const MarkedPointCloud& cloud_;
    int dim_;
    double cell_;
    std::vector<double> origin_;
    std::vector<std::int64_t> counts_;
    std::vector<std::vector<std::uint32_t>> cells_;
};

// Vertex CSV: `id,x1,...,xd,mark[,orientation]`, 17 significant digits.
void write_vertex_csv(std::ostream& out, const MarkedPointCloud& cloud);

}  // namespace chemdist

#endif
