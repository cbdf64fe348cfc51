#pragma once

#include <cstdint>

namespace nds {

/// SplitMix64 mixing step. Used for both stream generation and seed
/// derivation so results are identical across platforms and standard
/// library implementations.
[[nodiscard]] constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Minimal counter-based generator (SplitMix64).
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform double in [-0.5, 0.5).
    double next_symmetric() { return next_unit() - 0.5; }

private:
    std::uint64_t state_;
};

/// Splittable per-run seed: a pure function of (master, key1, key2).
/// Keyed on values rather than positions, so extending a sweep with new
/// tau values never perturbs existing entries.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t key1,
                                                  std::uint64_t key2 = 0) {
    std::uint64_t s = splitmix64_mix(master + 0x9E3779B97F4A7C15ULL * (key1 + 1));
    return splitmix64_mix(s + 0xD1B54A32D192ED03ULL * (key2 + 1));
}

} // namespace nds
