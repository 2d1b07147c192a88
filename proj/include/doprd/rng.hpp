#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace doprd {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Purpose labels for independent random streams. World generation and
/// scenario sampling never share a stream.
enum class Stream : std::uint64_t {
    world_generation = 0x57304c44,
    dynamic_selection = 0x44594e41,
    scenario_sampling = 0x5343454e,
};

/// Seeds a generator from a base seed and a stream label so that two streams
/// derived from the same base seed are uncorrelated.
inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t salt = 0) {
    const std::uint64_t mixed = splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(stream) + salt));
    std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
    return Rng(seq);
}

}  // namespace doprd
