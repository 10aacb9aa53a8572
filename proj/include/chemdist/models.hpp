#ifndef CHEMDIST_MODELS_HPP
#define CHEMDIST_MODELS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "chemdist/kernels.hpp"
#include "chemdist/point_process.hpp"

namespace chemdist {

// Undirected graph over a marked point cloud. Adjacency lists are sorted;
// the structure is immutable after construction.
struct SpatialGraph {
    MarkedPointCloud cloud;
    std::vector<std::vector<std::uint32_t>> adj;
    std::uint64_t edge_count = 0;

    std::size_t size() const { return cloud.size(); }
    std::size_t degree(std::uint32_t v) const { return adj[v].size(); }
    bool has_edge(std::uint32_t a, std::uint32_t b) const;

    // Visits each edge once with a < b.
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (std::uint32_t a = 0; a < adj.size(); ++a)
            for (std::uint32_t b : adj[a])
                if (b > a) fn(a, b);
    }

    double mean_degree() const {
        return size() == 0 ? 0.0 : 2.0 * static_cast<double>(edge_count) / static_cast<double>(size());
    }
};

SpatialGraph make_graph(MarkedPointCloud cloud,
                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

using EdgeVisitor = std::function<void(std::uint32_t, std::uint32_t)>;

// Seed of the pair-coin stream derived from an operation seed; every edge
// generator keys its coins as (edge_stream_seed(seed), point key, point key).
std::uint64_t edge_stream_seed(std::uint64_t seed);

// Single source of truth for the WDRCM edge law: enumerates exactly the
// pairs whose keyed coin falls below the kernel probability. Indicator
// profiles route through a grid (the edge set is a deterministic function
// of the cloud); polynomial profiles walk all pairs with a prune at
// probabilities below the smallest representable coin.
void for_each_wdrcm_edge(const MarkedPointCloud& cloud, const ConnectionKernel& kernel,
                         std::uint64_t seed, const EdgeVisitor& fn);

SpatialGraph connect_wdrcm(const MarkedPointCloud& cloud, const ConnectionKernel& kernel,
                           std::uint64_t seed);

// Long-range percolation on a lattice cloud: pair probability
// min(1, amplitude * r^(-d*delta)). Nearest neighbours go through the same
// formula (amplitude 1 makes them certain).
void for_each_lrp_edge(const MarkedPointCloud& cloud, double delta, double amplitude,
                       std::uint64_t seed, const EdgeVisitor& fn);

SpatialGraph connect_long_range_percolation(const MarkedPointCloud& cloud, double delta,
                                            double amplitude, std::uint64_t seed);

// Soft Boolean model with local interference: the bare kernel probability is
// divided by the cloud count inside the stronger endpoint's interference
// ball (the vertex itself included, so the quotient is well defined).
struct InterferenceParams {
    double beta = 0.5;
    ConnectionKernel base;  // gamma_prime must be 0

    void validate() const;
    // Ball of x: |x-z|^d < u_x^(-beta).
    double ball_radius(double mark, int dim) const;
};

std::vector<std::uint32_t> interference_denominators(const MarkedPointCloud& cloud,
                                                     const InterferenceParams& params);

SpatialGraph connect_interference(const MarkedPointCloud& cloud, const InterferenceParams& params,
                                  std::uint64_t seed);

// Planar ellipses percolation: grains with Pareto(2/gamma) major axes (from
// the vertex marks), unit minor axes and the cloud's orientations; edges are
// grain intersections and carry no extra randomness.
struct EllipseParams {
    double gamma = 0.5;

    void validate() const;
    double major_axis(double mark) const;
};

SpatialGraph connect_ellipses(const MarkedPointCloud& cloud, const EllipseParams& params,
                              std::uint64_t seed);

// Expected degree of the infinite-volume model at the given intensity:
// lambda * Int_{R^d} Int_0^1 Int_0^1 rho(...) du dv dz, radial part reduced
// analytically, mark part by adaptive quadrature (relative error <= 1e-4).
double expected_degree(const ConnectionKernel& kernel, double intensity, int dim);

// Expected number of edges per unit of vertex mass reaching farther than
// `radius`; used for pad sizing.
double expected_degree_tail(const ConnectionKernel& kernel, double intensity, int dim,
                            double radius);

// Edge CSV: header `id_a,id_b` with id_a < id_b.
void write_edge_csv(std::ostream& out, const SpatialGraph& graph);

}  // namespace chemdist

#endif
