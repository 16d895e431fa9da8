#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace gmtbench::rng {

/// FNV-1a over a byte string. Used to derive per-run seeds that are stable
/// across platforms and independent of execution order.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& key) {
    return fnv1a(std::to_string(base_seed) + "|" + key);
}

/// Uniform double in [0,1). mt19937_64 output is fully specified by the
/// standard, and this mapping avoids the implementation-defined behaviour of
/// std::uniform_real_distribution, so streams are bit-identical everywhere.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] inclusive.
inline long uniform_int(std::mt19937_64& gen, long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long>(gen() % span);
}

inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

inline double log_uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::exp(uniform_real(gen, std::log(lo), std::log(hi)));
}

}  // namespace gmtbench::rng
