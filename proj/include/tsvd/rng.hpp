#pragma once

#include <cstdint>
#include <random>

namespace tsvd {

/// SplitMix64 finalizer applied to a 64-bit state.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based stream derivation: the seed of stream `index` under `base`.
/// Streams for different indices are decorrelated and independent of the
/// order in which they are requested.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// Deterministic source of uniform, Gaussian and Rademacher draws.
///
/// Engine: std::mt19937_64 (fully specified by the C++ standard) seeded with
/// splitmix64(seed). Uniforms take the top 53 bits of one engine output.
/// Gaussians use the Box-Muller transform on a pair (u1 in (0,1], u2 in [0,1)),
/// returning the cosine branch first and caching the sine branch.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    /// Uniform on [0, 1).
    double uniform();
    double gaussian();
    /// +1 or -1 with equal probability.
    double rademacher();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tsvd
