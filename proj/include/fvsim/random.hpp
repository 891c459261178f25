#pragma once

#include <cstdint>
#include <random>

namespace fvsim {

/// Random stream handle. Every sampling call takes one of these by
/// reference; the library keeps no global generator.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the stream used by replicate `index` of an experiment.
///
/// The input word master + (index + 1) * golden is distinct for distinct
/// indices (the golden constant is odd), and the finalizer is a bijection,
/// so distinct indices never share a stream. The result depends only on
/// (master, index), never on how replicates are scheduled.
constexpr std::uint64_t derive_replicate_seed(std::uint64_t master_seed,
                                              std::uint64_t replicate_index) noexcept {
    return splitmix64(master_seed + (replicate_index + 1) * 0x9e3779b97f4a7c15ULL);
}

inline Rng make_rng(std::uint64_t master_seed, std::uint64_t replicate_index) {
    return Rng(derive_replicate_seed(master_seed, replicate_index));
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double exponential(Rng& rng, double rate) {
    return std::exponential_distribution<double>(rate)(rng);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

} // namespace fvsim
