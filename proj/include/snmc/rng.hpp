#pragma once

#include <cmath>
#include <cstdint>

namespace snmc {

// Where in the estimation a stream is consumed. Pilot evaluations are the
// base-branch cells (i, k<=2), so they share the Base role; that identity is
// what makes pilot reuse bit-exact.
enum class StreamRole : std::uint32_t {
    DesignBase   = 1, // input design X^(i)
    DesignFrozen = 2, // companion design used for pick-freeze points
    Base         = 3, // repetition noise on the base branch
    Freeze       = 4, // repetition noise on a frozen branch (per group)
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's public-domain C version).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Second finalization round, Stafford's mix13 constants. One round is fine
// for a single long stream but leaves measurable structure across millions of
// sibling streams with small-integer tuple differences; the extra round makes
// pooled cross-stream means statistically clean.
inline std::uint64_t mix64_again(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0x4BE98134A5976FD3ull;
    z = (z ^ (z >> 29)) * 0x3BC0993A5AD19A13ull;
    return z ^ (z >> 31);
}

inline std::uint64_t absorb(std::uint64_t h, std::uint64_t word) {
    return mix64(h + kGolden + word);
}

} // namespace detail

// Counter-based pseudo-random stream keyed by a derivation tuple. Two streams
// built from the same tuple replay the same variates exactly; distinct tuples
// give statistically unrelated sequences. Cheap to create, value semantics,
// never shared across threads.
class NoiseStream {
public:
    NoiseStream() : key_(0), state_(0) {}

    static NoiseStream derive(std::uint64_t seed, StreamRole role, std::uint32_t group,
                              std::uint64_t exploration, std::uint64_t repetition,
                              std::uint64_t replication) {
        std::uint64_t h = detail::absorb(0, seed);
        h = detail::absorb(h, (static_cast<std::uint64_t>(role) << 32) | group);
        h = detail::absorb(h, exploration);
        h = detail::absorb(h, repetition);
        h = detail::absorb(h, replication);
        NoiseStream s;
        s.key_ = h;
        s.state_ = h;
        return s;
    }

    // Stable 64-bit digest of the derivation tuple; handed to external models
    // as their noise seed.
    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix64_again(detail::mix64(state_));
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double a, double b) {
        return a + (b - a) * next_uniform01();
    }

    // Standard normal via Box-Muller (cosine branch only, no cached state, so
    // the variate depends on exactly two counter positions).
    double next_normal() {
        const double u1 = 1.0 - next_uniform01(); // (0, 1], keeps log finite
        const double u2 = next_uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t state_;
};

} // namespace snmc
