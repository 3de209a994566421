#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace groktopo {

/// SplitMix64 (Steele, Lea, Flood 2014) used as a counter-based generator:
/// the i-th output is mix64(seed + (i + 1) * 0x9E3779B97F4A7C15). Every
/// derived quantity below is defined in terms of these 64-bit outputs only,
/// so results are identical on every platform and standard library.
///
///   uniform()        : (x >> 11) * 2^-53, in [0, 1)
///   uniform_int(n)   : Lemire multiply-shift with rejection, unbiased in [0, n)
///   normal()         : Box-Muller cosine branch on two fresh uniforms
///   shuffle()        : Fisher-Yates from the back, j = uniform_int(i + 1)
class Rng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent stream for a named purpose (split, init, batches, ...).
    static Rng stream(std::uint64_t seed, std::uint64_t tag) { return Rng(mix64(seed ^ mix64(tag + kGolden))); }

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t uniform_int(std::uint64_t n) {
        // Lemire's nearly-divisionless method.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Stream tags, fixed so that adding a new consumer never perturbs old ones.
namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kPermuteSelect = 2;
inline constexpr std::uint64_t kPermuteLabels = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kBatches = 5;
inline constexpr std::uint64_t kSubsample = 6;
}  // namespace streams

}  // namespace groktopo
