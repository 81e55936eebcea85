#pragma once

#include <cstdint>
#include <random>

namespace ehdn {

/// splitmix64; used to derive independent per-sample seeds from one master
/// seed so parallel Monte-Carlo runs are order-independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
    return splitmix64(master * 0x9e3779b97f4a7c15ULL + counter + 1);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t counter) {
    return std::mt19937_64(derive_seed(master, counter));
}

}  // namespace ehdn
