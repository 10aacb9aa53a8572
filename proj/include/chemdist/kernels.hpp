#ifndef CHEMDIST_KERNELS_HPP
#define CHEMDIST_KERNELS_HPP

#include <cmath>
#include <cstdint>
#include <limits>

#include "chemdist/errors.hpp"
#include "chemdist/rng.hpp"

namespace chemdist {

enum class Profile { Polynomial, Indicator };

// Connection kernel of the weight-dependent random connection model: a pair
// with marks u, v at distance r carries an edge with probability
// rho(amplitude * (u^v min)^gamma * (u^v max)^gamma' * r^d), where rho is
// either t -> min(1, t^-delta) or the indicator of [0,1]. delta = infinity
// is stored explicitly and routes to the indicator profile.
struct ConnectionKernel {
    double gamma = 0.0;
    double gamma_prime = 0.0;
    double delta = std::numeric_limits<double>::infinity();
    Profile profile = Profile::Indicator;
    double amplitude = 1.0;

    bool indicator() const { return profile == Profile::Indicator; }

    void validate() const {
        if (!(gamma >= 0.0) || gamma >= 1.0)
            throw ParameterError("kernel: gamma must lie in [0,1)");
        if (!(gamma_prime >= 0.0) || gamma_prime >= 2.0 - gamma)
            throw ParameterError("kernel: gamma' must lie in [0, 2-gamma)");
        if (profile == Profile::Polynomial) {
            if (!(delta > 1.0) || std::isinf(delta))
                throw ParameterError("kernel: polynomial profile needs finite delta > 1");
        } else if (!std::isinf(delta)) {
            throw ParameterError("kernel: indicator profile encodes delta = infinity");
        }
        if (!(amplitude > 0.0)) throw ParameterError("kernel: amplitude must be positive");
    }
};

inline ConnectionKernel gilbert_kernel(double amplitude = 1.0) {
    return ConnectionKernel{0.0, 0.0, std::numeric_limits<double>::infinity(),
                            Profile::Indicator, amplitude};
}

inline ConnectionKernel boolean_kernel(double gamma) {
    return ConnectionKernel{gamma, 0.0, std::numeric_limits<double>::infinity(),
                            Profile::Indicator, 1.0};
}

inline ConnectionKernel soft_boolean_kernel(double gamma, double delta) {
    return ConnectionKernel{gamma, 0.0, delta, Profile::Polynomial, 1.0};
}

inline ConnectionKernel wdrcm_kernel(double gamma, double gamma_prime, double delta,
                                     double amplitude = 1.0) {
    Profile p = std::isinf(delta) ? Profile::Indicator : Profile::Polynomial;
    return ConnectionKernel{gamma, gamma_prime, delta, p, amplitude};
}

namespace detail {
// t^-k by repeated multiplication for small integer k. This, not std::pow,
// is the canonical evaluation for integer delta so that every generator
// path reproduces bit-identical probabilities.
inline double neg_int_pow(double t, int k) {
    double acc = 1.0;
    double base = 1.0 / t;
    while (k > 0) {
        if (k & 1) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}
}  // namespace detail

// rho applied to an already-assembled argument t >= 0.
inline double profile_value(const ConnectionKernel& k, double t) {
    if (t <= 1.0) return 1.0;
    if (k.indicator()) return 0.0;
    const int di = static_cast<int>(k.delta);
    if (static_cast<double>(di) == k.delta && di <= 64) return detail::neg_int_pow(t, di);
    return std::pow(t, -k.delta);
}

// Kernel argument before rho, given marks and r^d.
inline double kernel_argument(const ConnectionKernel& k, double mark_a, double mark_b,
                              double r_pow_d) {
    const double lo = mark_a < mark_b ? mark_a : mark_b;
    const double hi = mark_a < mark_b ? mark_b : mark_a;
    double t = k.amplitude * r_pow_d;
    if (k.gamma > 0.0) t *= std::pow(lo, k.gamma);
    if (k.gamma_prime > 0.0) t *= std::pow(hi, k.gamma_prime);
    return t;
}

inline double pair_probability(const ConnectionKernel& k, double mark_a, double mark_b,
                               double r_pow_d) {
    return profile_value(k, kernel_argument(k, mark_a, mark_b, r_pow_d));
}

// One coin per unordered pair, keyed by the two point identities; the edge
// set is therefore independent of enumeration order and stable under vertex
// relabelling.
inline std::uint64_t pair_coin_key(std::uint64_t edge_seed, std::uint64_t key_a,
                                   std::uint64_t key_b) {
    const std::uint64_t lo = key_a < key_b ? key_a : key_b;
    const std::uint64_t hi = key_a < key_b ? key_b : key_a;
    return rng::key_of({edge_seed, lo, hi});
}

inline bool pair_coin(std::uint64_t edge_seed, std::uint64_t key_a, std::uint64_t key_b,
                      double probability) {
    if (probability >= 1.0) return true;
    if (probability <= rng::kMinCoin) return false;
    return rng::keyed_unit_open(pair_coin_key(edge_seed, key_a, key_b)) < probability;
}

}  // namespace chemdist

#endif
