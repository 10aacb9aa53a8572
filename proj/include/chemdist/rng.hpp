#ifndef CHEMDIST_RNG_HPP
#define CHEMDIST_RNG_HPP

#include <bit>
#include <cstdint>
#include <initializer_list>

// Counter-based randomness. Every random quantity in the project is a pure
// function of a 64-bit key, so draws do not depend on evaluation order and
// generators may skip draws they never consume. Sequential streams exist
// only where a genuinely sequential sampler is required (Poisson counts,
// shuffles).

namespace chemdist::rng {

using std::uint64_t;

inline constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr uint64_t mix64(uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Order-dependent absorb step (hash_combine flavour).
constexpr uint64_t absorb(uint64_t h, uint64_t w) noexcept {
    h ^= mix64(w + kGamma) + kGamma + (h << 6) + (h >> 2);
    return mix64(h);
}

constexpr uint64_t key_of(std::initializer_list<uint64_t> words) noexcept {
    uint64_t h = 0x243F6A8885A308D3ull;  // arbitrary nonzero start
    for (uint64_t w : words) h = absorb(h, w);
    return h;
}

inline uint64_t bits_of(double x) noexcept { return std::bit_cast<uint64_t>(x); }

// [0,1) with 53 random bits.
constexpr double to_unit(uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// (0,1); lowest value 2^-54. Used for marks and for pair coins, so that an
// event with probability <= 2^-54 provably never fires and generators may
// prune such pairs without changing the realisation.
constexpr double to_unit_open(uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline constexpr double kMinCoin = 0x1.0p-54;

inline double keyed_unit(uint64_t key) noexcept { return to_unit(mix64(key)); }
inline double keyed_unit_open(uint64_t key) noexcept { return to_unit_open(mix64(key)); }

// Sequential splitmix64 stream.
class Stream {
  public:
    explicit Stream(uint64_t seed) noexcept : state_(seed) {}

    uint64_t next_u64() noexcept {
        state_ += kGamma;
        return mix64(state_);
    }
    double next_unit() noexcept { return to_unit(next_u64()); }
    double next_unit_open() noexcept { return to_unit_open(next_u64()); }

    // Unbiased integer in [0, n) by rejection.
    uint64_t next_below(uint64_t n) noexcept {
        const uint64_t limit = n * (UINT64_MAX / n);
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

  private:
    uint64_t state_;
};

// Exact Poisson sampler: exponential race for small means, transformed
// rejection (PTRD) for large ones.
std::uint64_t poisson(Stream& stream, double mean);

}  // namespace chemdist::rng

#endif
