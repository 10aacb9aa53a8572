#ifndef CHEMDIST_GRAPH_CORE_HPP
#define CHEMDIST_GRAPH_CORE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "chemdist/models.hpp"
#include "chemdist/stats.hpp"

namespace chemdist {

using Hops = std::uint32_t;
inline constexpr Hops kUnreachable = std::numeric_limits<Hops>::max();  // min over {} = infinity

// Exact hop counts from `source` to every vertex (breadth-first).
std::vector<Hops> distances_from(const SpatialGraph& graph, std::uint32_t source);

// Shortest hop count between two vertices, kUnreachable if disconnected.
Hops chemical_distance(const SpatialGraph& graph, std::uint32_t source, std::uint32_t target);

// Event that every vertex of the inner box Lambda_L sits at chemical
// distance >= eta * Euclidean distance from every measured vertex outside
// Lambda_m. Boxes are centred at the window centre.
struct DistanceEventSpec {
    double inner_side = 1.0;   // L
    double outer_side = 2.0;   // m
    double eta = 0.05;

    void validate() const;
};

struct DEventWitness {
    std::uint32_t x = 0, y = 0;
    Hops hops = 0;
    double euclidean = 0.0;
};

struct DEventResult {
    bool holds = true;
    std::optional<DEventWitness> witness;
};

DEventResult check_D_event(const SpatialGraph& graph, const DistanceEventSpec& spec);

// Distance/Euclidean ratio statistics at the given radii. For radius r the
// pairs sampled satisfy |x-y| in [r, 1.1r]; only connected pairs count.
struct ProfileRow {
    double radius = 0.0;
    std::size_t count = 0;    // 0 flags an empty row
    Quartiles ratio;
};

std::vector<ProfileRow> distance_ratio_profile(const SpatialGraph& graph,
                                               const std::vector<double>& radii,
                                               std::size_t samples, std::uint64_t seed);

// Raw ratio samples per radius, for pooling across replicates.
std::vector<std::vector<double>> distance_ratio_samples(const SpatialGraph& graph,
                                                        const std::vector<double>& radii,
                                                        std::size_t samples, std::uint64_t seed);

}  // namespace chemdist

#endif
