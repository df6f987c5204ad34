#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace editex {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded generator whose output is identical on every platform: the engine
/// is mt19937_64 (fully specified by the standard) and the distributions are
/// implemented here rather than taken from <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Independent stream for (seed, stream), e.g. one per tree.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed) ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n); n > 0.
    std::size_t index(std::size_t n);

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [0, 1].
    double uniform_closed01() { return static_cast<double>(next() >> 11) / static_cast<double>((1ULL << 53) - 1); }

private:
    std::mt19937_64 engine_;
};

}  // namespace editex
