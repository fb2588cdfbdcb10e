#pragma once

#include <cstdint>

namespace scalelab {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/**
 * Counter-based generator: draw number i of stream s under seed is
 *
 *   key  = mix64(seed + 0x9E3779B97F4A7C15 * (s + 1))
 *   bits = mix64(key + 0x9E3779B97F4A7C15 * (i + 1))
 *
 * so any draw can be recomputed from (seed, stream, i) alone. Uniforms use
 * the top 53 bits; normals use Box-Muller on two consecutive draws.
 */
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed + kGolden * (stream + 1))) {}

    static constexpr std::uint64_t bits_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
        return mix64(mix64(seed + kGolden * (stream + 1)) + kGolden * (index + 1));
    }

    constexpr std::uint64_t next_u64() { return mix64(key_ + kGolden * (++counter_)); }
    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_open0() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }
    /// floor(u * n) with u = uniform(); n must be positive.
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
    /// Standard normal: sqrt(-2 ln u1) cos(2 pi u2), u1 from (0, 1].
    double normal();

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace scalelab
