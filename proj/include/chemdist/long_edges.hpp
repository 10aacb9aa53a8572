#ifndef CHEMDIST_LONG_EDGES_HPP
#define CHEMDIST_LONG_EDGES_HPP

#include <cmath>
#include <cstdint>

#include "chemdist/model_spec.hpp"
#include "chemdist/stats.hpp"

namespace chemdist {

// Downward vertex-boundary exponent
//   zeta = max{ 2-delta, 1-(delta-1)/(gamma delta),
//               (gamma'+gamma-1)/gamma, 2(gamma'+gamma-1)/(gamma'+gamma) }.
// Limiting conventions: a term whose denominator vanishes is -infinity when
// its numerator is negative and undefined (flagged) otherwise; delta =
// infinity gives 2-delta = -infinity and (delta-1)/(gamma delta) -> 1/gamma.
struct ZetaResult {
    double value = 0.0;  // may be -infinity
    bool defined = true;
};

ZetaResult zeta(double delta, double gamma, double gamma_prime);

// Assumed long-edge tail for bound overlays: P(L(m,n)) <= C_L m^d n^mu with
// mu < -d. The constant is user-supplied, never estimated.
struct LongEdgeTail {
    double mu = -3.0;
    double C_L = 1.0;

    void validate(int dim) const {
        if (!(mu < -static_cast<double>(dim)))
            throw ParameterError("long-edge tail: mu must be below -d");
        if (!(C_L > 0.0)) throw ParameterError("long-edge tail: C_L must be positive");
    }
    double bound(double m, double n, int dim) const {
        validate(dim);
        return C_L * std::pow(m, dim) * std::pow(n, mu);
    }
};

// Long-edge event L(m,n): some edge internal to the box of side m around
// the window centre is longer than n.
struct LongEdgeScan {
    bool detected = false;
    double max_internal_length = 0.0;
};

LongEdgeScan detect_L(const SpatialGraph& graph, double m, double n);

struct PLEstimate {
    double m = 0.0, n = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t successes = 0;
    double estimate = 0.0;
    Interval ci;
    std::uint64_t seed = 0;
};

// Monte Carlo estimate of P(L(m,n)) over independent replicates. Uses an
// exact shortcut per model family (pathwise identical to building the graph
// and scanning it: pair coins are keyed, so enumeration order is free).
PLEstimate estimate_P_L(const ModelSpec& model, double m, double n, std::uint64_t replicates,
                        std::uint64_t seed);

// Exact long-edge decision for one replicate.
bool replicate_detects_long_edge(const ModelSpec& model, double m, double n,
                                 std::uint64_t replicate_seed_value);

// The bracketed term of the long-edge first-moment bound:
//   r^{2d} Int_{[r^{d(zeta-1)}, 1]^2} rho((u^v)^gamma (u v max)^gamma' r^d) du dv,
// adaptive quadrature with relative error <= 1e-4.
double bracket_integral(const ConnectionKernel& kernel, double r, int dim);

}  // namespace chemdist

#endif
