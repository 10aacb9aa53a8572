#ifndef CHEMDIST_RENORM_HPP
#define CHEMDIST_RENORM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chemdist/model_spec.hpp"
#include "chemdist/stats.hpp"

namespace chemdist {

// Factorial scale ladder K_n = K (n!)^2; K even, stage-n boxes tile into
// exactly n^{2d} stage-(n-1) boxes.
std::int64_t scale(std::int64_t K, int n);

struct ScaleLadder {
    std::int64_t K = 4;
    int max_stage = 0;
    std::vector<std::int64_t> sizes;  // sizes[n] = K_n

    ScaleLadder(std::int64_t K_, int max_stage_);
    std::int64_t size(int stage) const { return sizes.at(static_cast<std::size_t>(stage)); }
    // Long-edge threshold of stage-n boxes: K_{n-1}/100 (K_0/100 at stage 0).
    double threshold(int stage) const {
        return static_cast<double>(sizes.at(static_cast<std::size_t>(stage == 0 ? 0 : stage - 1))) / 100.0;
    }
    // Extra room the shift families and recursive sub-boxes need beyond B_n.
    double required_margin(int stage) const;
};

struct BoxFailure {
    enum class Kind { LongEdge, TooManyBad };
    Kind kind = Kind::LongEdge;
    // LongEdge
    std::uint32_t edge_a = 0, edge_b = 0;
    double length = 0.0, threshold = 0.0;
    // TooManyBad
    std::vector<int> shift;  // j in {-1,0,1}^d
    int bad_count = 0;
};

struct BoxVerdict {
    int stage = 0;
    Vec center;
    bool good = true;
    std::optional<BoxFailure> failure;
};

// Recursive good/bad classification: a stage-n box is good when every box of
// its 3^d half-shifted family has no internal edge longer than K_{n-1}/100
// and at most 3^d bad stage-(n-1) boxes among the n^{2d} tiling it from its
// lower corner. Memoised per (stage, center).
BoxVerdict classify_box(const SpatialGraph& graph, const Vec& center, int stage,
                        const ScaleLadder& ladder);

struct PsiEstimate {
    std::int64_t K = 0;
    int stage = 0;
    std::uint64_t replicates = 0;
    std::uint64_t bad_count = 0;
    double estimate = 0.0;
    Interval ci;
};

// Monte Carlo fraction of replicates whose stage-n box at the origin is bad.
PsiEstimate estimate_psi(const ModelSpec& model, const ScaleLadder& ladder, int stage,
                         std::uint64_t replicates, std::uint64_t seed);

// Theoretical envelope ((n+1)!)^(-2|xi v (d+mu)| + c/n), evaluated in logs.
// Requires xi < 0, mu < -d, n >= 1 and c > 4(d + |xi ^ (d+mu)|).
double psi_bound(int n, double xi, double mu, int d, double c);

// prod_{h=N}^{n} (1 - N/h^2); the contraction factor of the good-path bound.
double renorm_product(int N, int n);

// Verdict CSV: `stage,center,good,failure_kind,detail`.
void write_verdict_csv(std::ostream& out, const std::vector<BoxVerdict>& verdicts);

// Alternating decomposition of a path against a set of bad boxes. Segments
// share junction vertices; both lists are padded with empty segments to
// 9^d entries.
struct PathDecomposition {
    std::vector<std::vector<std::uint32_t>> good_segments;
    std::vector<std::vector<std::uint32_t>> bad_segments;
};

PathDecomposition decompose_path(const SpatialGraph& graph,
                                 const std::vector<std::uint32_t>& path,
                                 const std::vector<Box>& bad_boxes);

// Greedy waypoints along a segment: spacing above K_prev/16, every vertex
// between consecutive waypoints within K_prev/2 of the earlier one. The
// segment's endpoint becomes the final waypoint when it also clears the
// spacing bound.
std::vector<std::size_t> greedy_waypoints(const std::vector<Vec>& segment, double K_prev);

}  // namespace chemdist

#endif
