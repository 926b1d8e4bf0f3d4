#ifndef SHUTTLEFLOW_RNG_HPP
#define SHUTTLEFLOW_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace shuttleflow {

// The std distributions are implementation-defined, so draws go through the
// helpers below to keep outputs identical across standard libraries.
using RandomEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over the bytes of `s`, then mixed with `seed`.
inline std::uint64_t hash_seed(std::uint64_t seed, std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(seed ^ splitmix64(h));
}

inline std::uint64_t hash_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

inline double uniform01(RandomEngine& rng) { return to_unit(rng()); }

/// Uniform integer in [0, n), unbiased by rejection.
inline std::uint64_t uniform_index(RandomEngine& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

inline double uniform_real(RandomEngine& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

} // namespace shuttleflow

#endif // SHUTTLEFLOW_RNG_HPP
