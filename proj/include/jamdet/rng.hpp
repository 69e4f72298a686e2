#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace jamdet {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent substream seed from a root seed and a path of keys,
/// e.g. (seed, scenario_id, block_index). Order of keys matters.
constexpr std::uint64_t substream_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = splitmix64(root);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
    return Rng(substream_seed(root, keys));
}

// Named substream tags.
namespace stream {
inline constexpr std::uint64_t geometry = 0x67656f6dULL;
inline constexpr std::uint64_t block = 0x626c6b00ULL;
inline constexpr std::uint64_t split = 0x73706c74ULL;
inline constexpr std::uint64_t svm = 0x73766d00ULL;
}  // namespace stream

}  // namespace jamdet
