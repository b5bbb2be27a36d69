#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace churnlab {

// splitmix64 finalizer; used to derive independent child seeds from a
// master seed plus a tag path (fold index, grid index, stage id, ...).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t p : path) h = mix64(h ^ p);
    return h;
}

using Rng = std::mt19937_64;

}  // namespace churnlab
