#pragma once

#include <cstdint>
#include <random>

namespace dqsops {

// SplitMix64 finalizer; spreads related seeds (seed ^ id) across the state
// space before they reach the engine.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Engine for a per-window stream: seed XOR window id, salted per purpose.
inline std::mt19937_64 window_engine(std::uint64_t seed, std::int64_t window_id,
                                     std::uint64_t salt) {
    return std::mt19937_64(mix_seed(seed ^ static_cast<std::uint64_t>(window_id)) ^ salt);
}

}  // namespace dqsops
