#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace jtwpa {

// splitmix64 step; used to decorrelate label-derived seeds so that nearby
// labels do not produce correlated mt19937_64 streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// FNV-1a over the label bytes; stable across platforms and versions.
inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// All randomness flows from one root seed; modules obtain independent streams
// by labeled splitting. Determinism per (seed, label) is the contract, not a
// particular bit stream across library versions.
inline std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view label) {
    return splitmix64(root_seed ^ splitmix64(hash_label(label)));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::mt19937_64 make_rng(std::uint64_t root_seed, std::string_view label) {
    return std::mt19937_64(derive_seed(root_seed, label));
}

} // namespace jtwpa
