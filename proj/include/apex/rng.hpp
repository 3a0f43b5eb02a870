#pragma once

#include <cstdint>
#include <random>

namespace apex {

/**
 * Deterministic random source.
 *
 * std::uniform_real_distribution is implementation-defined, so every sampler
 * here maps raw mt19937_64 output to values by hand. Two runs with the same
 * seed produce bit-identical streams on any conforming standard library,
 * which is what the byte-identical-results contract needs.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the distribution exact
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Fisher-Yates shuffle.
    template <typename Seq>
    void shuffle(Seq& seq) {
        for (std::size_t i = seq.size(); i > 1; --i) {
            std::swap(seq[i - 1], seq[static_cast<std::size_t>(below(i))]);
        }
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Stable per-task seed derivation (splitmix64 finalizer over seed and tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Same derivation with a readable tag (FNV-1a over the characters).
inline std::uint64_t derive_seed(std::uint64_t seed, const char* tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char* p = tag; *p != '\0'; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x100000001b3ull;
    }
    return derive_seed(seed, h);
}

}  // namespace apex
