#pragma once

#include <cstdint>

namespace miaudit {

// SplitMix64. Small, fast, and reproducible across platforms, which the
// bootstrap determinism contract needs (std::uniform_int_distribution is
// implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Independent substream i of a master seed. Resample i of a bootstrap
    // draws from substream(seed, i) so results do not depend on scheduling.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng mixer(seed);
        std::uint64_t base = mixer.next();
        Rng idx_mixer(base + 0x9E3779B97F4A7C15ULL * (index + 1));
        return Rng(idx_mixer.next());
    }

  private:
    std::uint64_t state_;
};

}  // namespace miaudit
