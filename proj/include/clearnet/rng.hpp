#pragma once

#include <cstdint>
#include <random>

namespace clearnet {

using Rng = std::mt19937_64;

// splitmix64 step (Steele/Lea/Flood); used only to derive sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based seed derivation: stream k of a master seed is independent of
// how many other streams were drawn, so parallel consumers stay reproducible
// regardless of scheduling order.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master + (stream + 1) * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    return splitmix64(s);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(sub_seed(master, stream));
}

}  // namespace clearnet
