#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

#include "qgt/error.hpp"

namespace qgt {

/// SplitMix64 (Steele, Lea, Flood 2014). Every random quantity in the library is
/// drawn from this stream so that outputs are bit-identical across platforms.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return finalize(state_);
    }

    constexpr std::uint64_t operator()() noexcept { return next(); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    /// Uniform integer in [0, bound) by rejection; bound must be nonzero.
    std::uint64_t uniform_below(std::uint64_t bound) {
        detail::require(bound > 0, ErrorCode::InvalidParams, "uniform_below: bound must be positive");
        // Largest multiple of bound that fits in 2^64; draws at or above it are rejected.
        const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
        for (;;) {
            const std::uint64_t w = next();
            if (rem == 0 || w <= limit) return w % bound;
        }
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    constexpr double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// One SplitMix64 step from state x: finalize(x + golden gamma).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    return SplitMix64::finalize(x + 0x9e3779b97f4a7c15ULL);
}

/// FNV-1a, used to turn algorithm names into stable 64-bit tags.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace qgt
