#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rrsim {

using Rng = std::mt19937_64;

// Sub-process tags used when splitting a replication seed into streams.
enum class Stream : std::uint64_t {
    StageOne = 1,
    StageTwo = 2,
    Walkins = 3,
    WarmStart = 4,
    Profile = 5,
    Restarts = 6,
    Dataset = 7,
};

constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Folds the keys into the master seed one splitmix64 round at a time.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
    return h;
}

inline Rng make_stream(std::uint64_t replication_seed, std::int64_t day, Stream s) {
    return Rng(derive_seed(replication_seed, {static_cast<std::uint64_t>(day), static_cast<std::uint64_t>(s)}));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace rrsim
