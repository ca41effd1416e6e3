#pragma once

#include <cstdint>
#include <random>

namespace memfir {

using Rng = std::mt19937_64;

// Derives an independent sub-seed from a master seed and a stream index
// (splitmix64 finalizer over master + golden-ratio-spaced stream offset).
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t stream) {
    return Rng{split_seed(master, stream)};
}

// Stream indices used when a scenario fans one master seed out to its stages.
namespace streams {
inline constexpr std::uint64_t kDeviceSpawn = 1;
inline constexpr std::uint64_t kTuning = 2;
inline constexpr std::uint64_t kStimulus = 3;
inline constexpr std::uint64_t kSweep = 4;
} // namespace streams

} // namespace memfir
