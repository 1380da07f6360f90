// random.hpp - seeded RNG helpers; every random decision derives from an explicit seed
#ifndef HYPERPART_UTIL_RANDOM_HPP
#define HYPERPART_UTIL_RANDOM_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "../types.hpp"

namespace hyperpart {

// splitmix64 finalizer; used to mix seeds with context tags so that
// sub-phases draw from independent streams.
inline std::uint64_t hash_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_with(std::uint64_t seed, std::uint64_t tag) {
    return hash_mix(seed ^ hash_mix(tag));
}

inline std::uint64_t seed_with(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2) {
    return seed_with(seed_with(seed, tag1), tag2);
}

inline std::uint64_t seed_with(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2,
                               std::uint64_t tag3) {
    return seed_with(seed_with(seed, tag1, tag2), tag3);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

template <typename T>
void shuffle_vector(std::vector<T>& v, Rng& rng) {
    std::shuffle(v.begin(), v.end(), rng);
}

inline std::vector<NodeId> random_permutation(NodeId n, Rng& rng) {
    std::vector<NodeId> perm(n);
    for (NodeId i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

// Uniform integer in [0, bound), bound > 0.
inline std::uint64_t random_below(Rng& rng, std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

}  // namespace hyperpart

#endif
