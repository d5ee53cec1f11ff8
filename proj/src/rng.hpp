#pragma once

#include <cstdint>

// Counter-based pseudo-random values. Every draw is a pure function of
// (seed, stream, counter), so generation order and thread scheduling are
// irrelevant and results are identical across platforms.
//
// The mixing function is the splitmix64 finalizer; documented in output
// metadata as "splitmix64-counter-v1".

namespace crl::rng {

inline constexpr const char* kAlgorithmId = "splitmix64-counter-v1";

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Value for a (seed, stream, counter) triple.
inline std::uint64_t draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix64(combine(combine(mix64(seed), stream), counter));
}

// Uniform double in [0, 1), 53 mantissa bits.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return to_unit(draw(seed, stream, counter));
}

} // namespace crl::rng
